//! The family `a_τ(s) = a(τ s + (1 − τ) D_anchor)` joining a constant
//! diffusion (`τ = 0`) to the original one (`τ = 1`).

use std::sync::Arc;

use serde::Serialize;

use super::{enumerate_equilibria, branch_count, BranchLabel, EquilibriumRecord};
use crate::error::{LabError, Result};
use crate::model::{Diffusion, ProblemSpec};
use crate::spectrum;

#[derive(Debug, Clone)]
pub struct HomotopyFamily {
    pub base: ProblemSpec,
    pub anchor: f64,
}

impl HomotopyFamily {
    pub fn new(base: ProblemSpec, anchor: f64) -> Self {
        HomotopyFamily { base, anchor }
    }

    pub fn diffusion(&self, tau: f64) -> Diffusion {
        if tau == 1.0 {
            return self.base.a.clone();
        }
        Diffusion::Homotopy { base: Arc::new(self.base.a.clone()), tau, anchor: self.anchor }
    }

    pub fn spec_at(&self, tau: f64) -> Result<ProblemSpec> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(LabError::InvalidInput(format!("tau = {tau} outside [0, 1]")));
        }
        self.base.with_diffusion(self.diffusion(tau))
    }
}

/// Equilibria and Conley index dimensions at one `τ`.
#[derive(Debug, Clone, Serialize)]
pub struct TauRow {
    pub tau: f64,
    pub a_tau_at_zero: f64,
    pub equilibria: Vec<EquilibriumRecord>,
}

impl TauRow {
    pub fn conley_dims(&self) -> Vec<(BranchLabel, Option<usize>)> {
        self.equilibria.iter().map(|e| (e.label, e.morse_index)).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TauContinuation {
    pub anchor_label: BranchLabel,
    pub anchor_d: f64,
    pub rows: Vec<TauRow>,
    /// `max ‖φ(τ_{i+1}) − φ(τ_i)‖_{H¹} / Δτ` over labels and grid steps.
    pub continuity_constant: f64,
}

/// Continues all equilibria along `τ`, anchored at `φ_N^±`.
///
/// Every row is filled with Morse indices from the linearization at that `τ`.
pub fn continue_in_tau(
    spec: &ProblemSpec,
    anchor_label: BranchLabel,
    tau_grid: &[f64],
    modes: usize,
) -> Result<TauContinuation> {
    let n = branch_count(spec)?;
    let (j, sign) = match anchor_label {
        BranchLabel::Branch { j, sign } if j == n && n >= 1 => (j, sign),
        _ => return Err(LabError::Precondition(format!("anchor must be phi_{n}^+/-, got {anchor_label}"))),
    };
    if !spec.a.is_monotone() {
        return Err(LabError::Precondition("tau continuation needs a non-decreasing diffusion".into()));
    }
    let anchor = super::solve_nonlocal_equilibrium(spec, j, sign, modes)?;
    let family = HomotopyFamily::new(spec.clone(), anchor.d);
    let expected = 2 * n + 1;
    let mut rows: Vec<TauRow> = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let spec_tau = family.spec_at(tau)?;
        let mut equilibria = match enumerate_equilibria(&spec_tau, modes) {
            Ok(e) => e,
            Err(LabError::DegenerateParameter { .. }) | Err(LabError::BranchNotBorn { .. }) => {
                return Err(LabError::ContinuationBreakdown { tau, found: 0, expected })
            }
            Err(e) => return Err(e),
        };
        if equilibria.len() != expected {
            return Err(LabError::ContinuationBreakdown { tau, found: equilibria.len(), expected });
        }
        for e in equilibria.iter_mut() {
            let report = spectrum::analyze(&spec_tau, e, modes)?;
            e.morse_index = Some(report.positive_count);
        }
        rows.push(TauRow { tau, a_tau_at_zero: spec_tau.a.value(0.0), equilibria });
    }
    let mut continuity_constant = 0.0_f64;
    for w in rows.windows(2) {
        let dt = (w[1].tau - w[0].tau).abs();
        if dt == 0.0 {
            continue;
        }
        for (a, b) in w[0].equilibria.iter().zip(&w[1].equilibria) {
            continuity_constant = continuity_constant.max(a.profile.h1_distance(&b.profile) / dt);
        }
    }
    Ok(TauContinuation { anchor_label, anchor_d: anchor.d, rows, continuity_constant })
}

/// `{0, 1/n, …, 1}`.
pub fn uniform_tau_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{classical_profile, Sign};

    #[test]
    fn endpoints_of_the_family() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let cont = continue_in_tau(&spec, BranchLabel::branch(3, Sign::Plus), &[0.0, 1.0], 32).unwrap();
        let original = enumerate_equilibria(&spec, 32).unwrap();
        for (a, b) in cont.rows[1].equilibria.iter().zip(&original) {
            assert_eq!(a.label, b.label);
            assert_eq!(a.profile, b.profile);
        }
        let a_bar = spec.a.value(cont.anchor_d);
        assert!((cont.rows[0].a_tau_at_zero - a_bar).abs() < 1e-15);
        for e in &cont.rows[0].equilibria {
            if let BranchLabel::Branch { j, sign } = e.label {
                let c = classical_profile(10.0 / a_bar, j, sign, 32).unwrap();
                assert!(e.profile.h1_distance(&c) < 1e-6);
            }
        }
    }

    #[test]
    fn anchor_must_be_top_branch() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let r = continue_in_tau(&spec, BranchLabel::branch(2, Sign::Plus), &[0.0], 32);
        assert!(matches!(r, Err(LabError::Precondition(_))));
    }

    #[test]
    fn a_tau_at_zero_is_between_a0_and_anchor() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let fam = HomotopyFamily::new(spec.clone(), 3.0);
        for tau in uniform_tau_grid(10) {
            let v = fam.diffusion(tau).value(0.0);
            assert!(v >= spec.a.value(0.0) - 1e-15 && v <= spec.a.value(3.0) + 1e-15);
        }
        assert!(fam.spec_at(1.5).is_err());
    }
}
