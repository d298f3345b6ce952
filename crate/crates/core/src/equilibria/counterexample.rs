//! A non-monotone diffusion with several positive equilibria.
//!
//! Starting from an increasing `a` with positive fixed point `d*`, the
//! diffusion `c_δ` agrees with `a` on `[0, d* + δ]`, falls linearly with
//! slope `−J` on `[d* + 2δ, d* + 3δ]` from `a(d*)` to `a(d̄)`, and equals
//! `a(0)` from `d* + 4δ` on. The two remaining gaps are bridged by cubic
//! Hermite pieces so that `c_δ ∈ C¹`.
//!
//! The largest attainable norm `d₀` is taken as the classical norm at the
//! effective parameter `λ / a(0)`, and `δ₀ = (d₀ − d*) / 4`.

use serde::Serialize;

use super::{branch_equilibria, norm_map_with, solve_fixed_point, EquilibriumRecord, Sign};
use crate::error::{LabError, Result};
use crate::model::{Diffusion, ProblemSpec};
use crate::numerics;

/// Cubic Hermite piece on `[x0, x0 + h]` in power form `Σ c_i s^i`, `s = (x − x0)/h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct Hermite {
    x0: f64,
    h: f64,
    c: [f64; 4],
}

impl Hermite {
    fn new(x0: f64, x1: f64, y0: f64, m0: f64, y1: f64, m1: f64) -> Self {
        let h = x1 - x0;
        let c = [y0, h * m0, -3.0 * y0 - 2.0 * h * m0 + 3.0 * y1 - h * m1, 2.0 * y0 + h * m0 - 2.0 * y1 + h * m1];
        Hermite { x0, h, c }
    }

    fn value(&self, x: f64) -> f64 {
        let s = (x - self.x0) / self.h;
        self.c[0] + s * (self.c[1] + s * (self.c[2] + s * self.c[3]))
    }

    fn derivative(&self, x: f64) -> f64 {
        let s = (x - self.x0) / self.h;
        (self.c[1] + s * (2.0 * self.c[2] + 3.0 * s * self.c[3])) / self.h
    }

    /// Minimum and maximum over the piece.
    fn range(&self) -> (f64, f64) {
        let mut candidates = vec![0.0, 1.0];
        let (a, b, c) = (3.0 * self.c[3], 2.0 * self.c[2], self.c[1]);
        if a.abs() > 1e-300 {
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                candidates.push((-b + disc.sqrt()) / (2.0 * a));
                candidates.push((-b - disc.sqrt()) / (2.0 * a));
            }
        } else if b.abs() > 1e-300 {
            candidates.push(-c / b);
        }
        candidates
            .into_iter()
            .filter(|s| (0.0..=1.0).contains(s))
            .map(|s| self.value(self.x0 + s * self.h))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

/// The piecewise C¹ diffusion `c_δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleDiffusion {
    #[serde(skip)]
    base: Diffusion,
    pub d_star: f64,
    pub d0: f64,
    pub delta0: f64,
    pub delta: f64,
    pub d_bar: f64,
    #[serde(rename = "J")]
    pub slope: f64,
    rise: Hermite,
    fall: Hermite,
}

impl CounterexampleDiffusion {
    /// The four breakpoints `d* + kδ`, `k = 1..4`.
    pub fn breakpoints(&self) -> [f64; 4] {
        let (d, h) = (self.d_star, self.delta);
        [d + h, d + 2.0 * h, d + 3.0 * h, d + 4.0 * h]
    }

    pub fn base(&self) -> &Diffusion {
        &self.base
    }

    pub fn value(&self, t: f64) -> f64 {
        let [t1, t2, t3, t4] = self.breakpoints();
        if t <= t1 {
            self.base.value(t)
        } else if t <= t2 {
            self.rise.value(t)
        } else if t <= t3 {
            self.base.value(self.d_star) - self.slope * (t - t2)
        } else if t <= t4 {
            self.fall.value(t)
        } else {
            self.base.value(0.0)
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let [t1, t2, t3, t4] = self.breakpoints();
        if t <= t1 {
            self.base.derivative(t)
        } else if t <= t2 {
            self.rise.derivative(t)
        } else if t <= t3 {
            -self.slope
        } else if t <= t4 {
            self.fall.derivative(t)
        } else {
            0.0
        }
    }

    /// Exact `(min, max)` over `[0, ∞)` for a non-decreasing base.
    pub fn bounds(&self) -> (f64, f64) {
        let [t1, ..] = self.breakpoints();
        let (r_lo, r_hi) = self.rise.range();
        let (f_lo, f_hi) = self.fall.range();
        let lo = self.base.value(0.0).min(r_lo).min(f_lo);
        let hi = self.base.value(t1).max(r_hi).max(f_hi).max(self.base.value(self.d_star));
        (lo, hi)
    }
}

/// Builds `c_δ` from a problem with increasing diffusion.
pub fn build_counterexample_a(base: &ProblemSpec, delta: f64, slope: f64, modes: usize) -> Result<CounterexampleDiffusion> {
    let a = base.a.clone();
    if !a.is_monotone() || !(a.value(1.0) > a.value(0.0)) {
        return Err(LabError::Construction("base diffusion must be increasing".into()));
    }
    if !(slope > 0.0) {
        return Err(LabError::Construction(format!("J must be positive, got {slope}")));
    }
    if !(delta > 0.0) {
        return Err(LabError::Construction(format!("delta must be positive, got {delta}")));
    }
    let d_star = solve_fixed_point(base, 1, modes)?;
    let d0 = norm_map_with(base.f, base.lambda / a.value(0.0), 1, modes)?;
    let delta0 = (d0 - d_star) / 4.0;
    if !(delta < delta0) {
        return Err(LabError::Construction(format!("delta = {delta} must be below delta0 = {delta0}")));
    }
    let (a0, a_star) = (a.value(0.0), a.value(d_star));
    let target = a_star - slope * delta;
    if !(target > a0) {
        return Err(LabError::Construction(format!(
            "J*delta = {} must stay below a(d*) - a(0) = {}",
            slope * delta,
            a_star - a0
        )));
    }
    let d_bar = numerics::bisect(|d| a.value(d) - target, 0.0, d_star, 1e-14, 200)?;
    let (t1, t2, t3, t4) = (d_star + delta, d_star + 2.0 * delta, d_star + 3.0 * delta, d_star + 4.0 * delta);
    let rise = Hermite::new(t1, t2, a.value(t1), a.derivative(t1), a_star, -slope);
    let fall = Hermite::new(t3, t4, target, -slope, a0, 0.0);
    let c = CounterexampleDiffusion { base: a, d_star, d0, delta0, delta, d_bar, slope, rise, fall };
    let (lo, _) = c.bounds();
    if !(lo > 0.0) {
        return Err(LabError::Construction(format!("c_delta dips to {lo} <= 0")));
    }
    Ok(c)
}

/// Positive (`j = 1`, slope `+`) equilibria of the problem with diffusion `c`.
pub fn positive_equilibria(base: &ProblemSpec, c: &CounterexampleDiffusion, modes: usize) -> Result<Vec<EquilibriumRecord>> {
    let spec = counterexample_spec(base, c)?;
    branch_equilibria(&spec, 1, Sign::Plus, modes)
}

pub fn counterexample_spec(base: &ProblemSpec, c: &CounterexampleDiffusion) -> Result<ProblemSpec> {
    base.with_diffusion(Diffusion::Counterexample(std::sync::Arc::new(c.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn built() -> (ProblemSpec, CounterexampleDiffusion) {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let d_star = solve_fixed_point(&spec, 1, 32).unwrap();
        let d0 = norm_map_with(spec.f, 10.0, 1, 32).unwrap();
        let delta = 0.5 * (d0 - d_star) / 4.0;
        let room = spec.a.value(d_star) - spec.a.value(0.0);
        let c = build_counterexample_a(&spec, delta, 0.9 * room / delta, 32).unwrap();
        (spec, c)
    }

    #[test]
    fn recipe_regions() {
        let (spec, c) = built();
        let a = &spec.a;
        assert_eq!(c.value(0.0), a.value(0.0));
        let [t1, t2, t3, t4] = c.breakpoints();
        assert_eq!(c.value(t4 + 1.0), a.value(0.0));
        assert_eq!(c.value(0.5 * t1), a.value(0.5 * t1));
        assert!((c.value(t2) - a.value(c.d_star)).abs() < 1e-14);
        assert!((c.value(t3) - a.value(c.d_bar)).abs() < 1e-12);
        assert_eq!(c.derivative(0.5 * (t2 + t3)), -c.slope);
        // C¹ across every breakpoint
        for t in [t1, t2, t3, t4] {
            let h = 1e-9;
            assert!((c.value(t - h) - c.value(t + h)).abs() < 1e-7);
            assert!((c.derivative(t - h) - c.derivative(t + h)).abs() < 1e-6 * (1.0 + c.slope));
        }
    }

    #[test]
    fn bounds_cover_dense_samples() {
        let (_, c) = built();
        let (lo, hi) = c.bounds();
        let t4 = c.breakpoints()[3];
        for i in 0..=10_000 {
            let v = c.value(t4 * 1.1 * i as f64 / 10_000.0);
            assert!(v >= lo - 1e-14 && v <= hi + 1e-14);
        }
    }

    #[test]
    fn construction_errors() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        assert!(build_counterexample_a(&spec, 0.1, -1.0, 32).is_err());
        assert!(build_counterexample_a(&spec, 100.0, 1.0, 32).is_err());
        assert!(build_counterexample_a(&spec, 0.1, 1e3, 32).is_err());
        let flat = ProblemSpec::new(10.0, crate::model::Nonlinearity::Cubic, Diffusion::Constant(1.0)).unwrap();
        assert!(build_counterexample_a(&flat, 0.1, 1.0, 32).is_err());
    }
}
