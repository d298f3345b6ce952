//! Problem data `(λ, f, a)` and the quantities defined directly from it.
//!
//! The nonlocal form is `u_t = a(‖u_x‖²) u_xx + λ f(u)`; dividing by the
//! diffusion coefficient gives the semilinear form
//! `u_t = u_xx + λ f(u) / a(‖u_x‖²)`, which has the same orbits after the
//! clock change `α(t) = ∫₀ᵗ a(‖u_x(s)‖²) ds` (see [`reparam_rate`]).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::equilibria::counterexample::CounterexampleDiffusion;
use crate::error::{LabError, Result};
use crate::numerics;
use crate::sine::{self, Field};

/// Reaction term presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `f(s) = s − s³`.
    Cubic,
    /// `f(s) = s`. Not dissipative; used for linear reference problems.
    Linear,
}

impl Nonlinearity {
    pub fn value(self, s: f64) -> f64 {
        match self {
            Nonlinearity::Cubic => s - s * s * s,
            Nonlinearity::Linear => s,
        }
    }

    pub fn derivative(self, s: f64) -> f64 {
        match self {
            Nonlinearity::Cubic => 1.0 - 3.0 * s * s,
            Nonlinearity::Linear => 1.0,
        }
    }

    pub fn second_derivative(self, s: f64) -> f64 {
        match self {
            Nonlinearity::Cubic => -6.0 * s,
            Nonlinearity::Linear => 0.0,
        }
    }

    /// `F(r) = ∫₀^r f`.
    pub fn primitive(self, r: f64) -> f64 {
        match self {
            Nonlinearity::Cubic => 0.5 * r * r - 0.25 * r * r * r * r,
            Nonlinearity::Linear => 0.5 * r * r,
        }
    }

    /// `|s|` beyond which `f(s)/s ≤ 0`, when the preset is dissipative.
    pub fn dissipativity_threshold(self) -> Option<f64> {
        match self {
            Nonlinearity::Cubic => Some(1.0),
            Nonlinearity::Linear => None,
        }
    }
}

/// Diffusion coefficient presets `a: [0, ∞) → [m, M]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Diffusion {
    Constant(f64),
    /// `a(s) = 1 + s/(1+s)`: increasing, `a(0) = 1`, bounds `[1, 2)`.
    Saturating,
    /// Piecewise C¹ diffusion with a decreasing segment, see
    /// [`CounterexampleDiffusion`].
    Counterexample(Arc<CounterexampleDiffusion>),
    /// `a_τ(s) = a(τ s + (1 − τ) D_anchor)`.
    Homotopy { base: Arc<Diffusion>, tau: f64, anchor: f64 },
}

impl Diffusion {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            Diffusion::Constant(c) => *c,
            Diffusion::Saturating => 1.0 + s / (1.0 + s),
            Diffusion::Counterexample(c) => c.value(s),
            Diffusion::Homotopy { base, tau, anchor } => base.value(tau * s + (1.0 - tau) * anchor),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Diffusion::Constant(_) => 0.0,
            Diffusion::Saturating => 1.0 / ((1.0 + s) * (1.0 + s)),
            Diffusion::Counterexample(c) => c.derivative(s),
            Diffusion::Homotopy { base, tau, anchor } => tau * base.derivative(tau * s + (1.0 - tau) * anchor),
        }
    }

    /// `∫₀^d a(s) ds` by adaptive Gauss–Kronrod quadrature to 1e−12.
    pub fn integral(&self, d: f64) -> f64 {
        match self {
            Diffusion::Counterexample(c) => {
                // integrate piece by piece so no panel straddles a breakpoint
                let mut cuts = vec![0.0];
                cuts.extend(c.breakpoints().into_iter().filter(|b| *b > 0.0 && *b < d));
                cuts.push(d);
                let n = cuts.len() - 1;
                cuts.windows(2)
                    .map(|w| numerics::integrate(|s| self.value(s), w[0], w[1], 1e-12 / n as f64))
                    .sum()
            }
            _ => numerics::integrate(|s| self.value(s), 0.0, d, 1e-12),
        }
    }

    /// Closed form of [`Diffusion::integral`] where one exists.
    pub fn integral_closed_form(&self, d: f64) -> Option<f64> {
        match self {
            Diffusion::Constant(c) => Some(c * d),
            Diffusion::Saturating => Some(d - (1.0 + d).ln() + d),
            _ => None,
        }
    }

    /// Whether the preset is non-decreasing by construction.
    pub fn is_monotone(&self) -> bool {
        match self {
            Diffusion::Constant(_) | Diffusion::Saturating => true,
            Diffusion::Counterexample(_) => false,
            Diffusion::Homotopy { base, tau, .. } => *tau >= 0.0 && base.is_monotone(),
        }
    }

    /// Lower and upper bounds `(m, M)` of `a` on `[0, ∞)`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Diffusion::Constant(c) => (*c, *c),
            Diffusion::Saturating => (1.0, 2.0),
            Diffusion::Counterexample(c) => c.bounds(),
            Diffusion::Homotopy { base, tau, anchor } => {
                if base.is_monotone() {
                    let lo = base.value((1.0 - tau) * anchor);
                    let hi = if *tau > 0.0 { base.bounds().1 } else { lo };
                    (lo, hi)
                } else {
                    base.bounds()
                }
            }
        }
    }

    /// The reference grid on which invariants are sampled.
    pub fn sample_grid() -> Vec<f64> {
        let mut g: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        g.extend([30.0, 50.0, 100.0, 1e3, 1e4]);
        g
    }
}

/// The triple `(λ, f, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub lambda: f64,
    pub f: Nonlinearity,
    pub a: Diffusion,
}

impl ProblemSpec {
    /// Builds and validates a problem.
    pub fn new(lambda: f64, f: Nonlinearity, a: Diffusion) -> Result<Self> {
        let spec = ProblemSpec { lambda, f, a };
        spec.validate()?;
        Ok(spec)
    }

    /// Cubic reaction with the saturating diffusion.
    pub fn default_with_lambda(lambda: f64) -> Result<Self> {
        ProblemSpec::new(lambda, Nonlinearity::Cubic, Diffusion::Saturating)
    }

    pub fn with_diffusion(&self, a: Diffusion) -> Result<Self> {
        ProblemSpec::new(self.lambda, self.f, a)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        ProblemSpec::new(lambda, self.f, self.a.clone())
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.a.bounds()
    }

    /// Checks the sampled invariants of `f` and `a`.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(LabError::InvalidInput(format!("lambda must be positive, got {}", self.lambda)));
        }
        let (m, big_m) = self.a.bounds();
        if !(m > 0.0 && m <= big_m) {
            return Err(LabError::InvalidInput(format!("diffusion bounds ({m}, {big_m}) invalid")));
        }
        let grid = Diffusion::sample_grid();
        let slack = 1e-12 * big_m;
        let mut prev = f64::NEG_INFINITY;
        for &s in &grid {
            let v = self.a.value(s);
            if !(v >= m - slack && v <= big_m + slack) {
                return Err(LabError::InvalidInput(format!("a({s}) = {v} outside [{m}, {big_m}]")));
            }
            if self.a.is_monotone() && v < prev - slack {
                return Err(LabError::InvalidInput(format!("a decreases at s = {s}")));
            }
            prev = v;
        }
        let f = self.f;
        if f.value(0.0) != 0.0 || (f.derivative(0.0) - 1.0).abs() > 1e-15 {
            return Err(LabError::InvalidInput("f needs f(0) = 0 and f'(0) = 1".into()));
        }
        let samples: Vec<f64> = (1..=200).map(|i| i as f64 * 0.025).collect();
        for &s in &samples {
            if (f.value(-s) + f.value(s)).abs() > 1e-14 * (1.0 + f.value(s).abs()) {
                return Err(LabError::InvalidInput(format!("f is not odd at s = {s}")));
            }
        }
        if let Some(threshold) = f.dissipativity_threshold() {
            for &s in &samples {
                if s * f.second_derivative(s) >= 0.0 || -s * f.second_derivative(-s) >= 0.0 {
                    return Err(LabError::InvalidInput(format!("s f''(s) < 0 fails at s = ±{s}")));
                }
                if s >= threshold && f.value(s) / s > 0.0 {
                    return Err(LabError::InvalidInput(format!("f(s)/s > 0 beyond threshold at s = {s}")));
                }
            }
        }
        Ok(())
    }
}

/// A value of the energy functional.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct EnergyValue {
    pub value: f64,
}

fn check_field(u: &Field) -> Result<()> {
    if u.is_finite() {
        Ok(())
    } else {
        Err(LabError::InvalidInput("field has non-finite coefficients".into()))
    }
}

/// `a(‖u_x‖²) u_xx + λ f(u)`, with the reaction term dealiased.
pub fn rhs_nonlocal(spec: &ProblemSpec, u: &Field) -> Result<Field> {
    check_field(u)?;
    let d = sine::h1_seminorm_sq(u);
    let reaction = sine::galerkin_map(u, |s| spec.f.value(s));
    Ok((&sine::second_derivative(u) * spec.a.value(d)).axpy(spec.lambda, &reaction))
}

/// `u_xx + λ f(u) / a(‖u_x‖²)`.
pub fn rhs_semilinear(spec: &ProblemSpec, u: &Field) -> Result<Field> {
    check_field(u)?;
    let d = sine::h1_seminorm_sq(u);
    let reaction = sine::galerkin_map(u, |s| spec.f.value(s));
    Ok(sine::second_derivative(u).axpy(spec.lambda / spec.a.value(d), &reaction))
}

/// `E(u) = ½∫₀^{‖u_x‖²} a(s) ds − λ ∫₀^π F(u(x)) dx`.
pub fn energy(spec: &ProblemSpec, u: &Field) -> Result<EnergyValue> {
    check_field(u)?;
    let d = sine::h1_seminorm_sq(u);
    Ok(EnergyValue { value: 0.5 * spec.a.integral(d) - spec.lambda * potential_integral(spec.f, u) })
}

/// `∫₀^π F(u) dx`, exact for the quartic primitive on the dealiased grid.
pub fn potential_integral(f: Nonlinearity, u: &Field) -> f64 {
    let grid = sine::to_grid(u, sine::dealiased_points(u.modes())).expect("dealiased grid resolves the field");
    grid.map(|s| f.primitive(s)).integral()
}

/// Clock rate `a(‖u_x‖²)` relating the nonlocal and semilinear forms.
pub fn reparam_rate(spec: &ProblemSpec, u: &Field) -> Result<f64> {
    check_field(u)?;
    Ok(spec.a.value(sine::h1_seminorm_sq(u)))
}
