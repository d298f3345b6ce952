//! An independent classical solver for `φ'' + μ f(φ) = 0`, `φ(0) = φ(π) = 0`,
//! with the cubic `f`, used to cross-validate the Galerkin pipeline when `a` is
//! constant.
//!
//! Amplitudes come from the time map
//! `T(A) = ∫₀^{π/2} dθ / √(μ(1 − A²(1 + sin²θ)/2))`, profiles from fixed-step
//! RK4, and instability counts from a finite-difference Sturm sequence.

use serde::Serialize;

use crate::equilibria::{BranchLabel, Sign};
use crate::error::{LabError, Result};
use crate::numerics::{self, gauss_legendre};
use crate::sine::Field;

/// Time from a zero to the next extremum at amplitude `A`.
pub fn time_map(mu: f64, amplitude: f64) -> f64 {
    let (x, w) = gauss_legendre(20);
    let panels = 64;
    let h = std::f64::consts::FRAC_PI_2 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            let s = (mid + 0.5 * h * xi).sin();
            total += 0.5 * h * wi / (mu * (1.0 - amplitude * amplitude * (1.0 + s * s) / 2.0)).sqrt();
        }
    }
    total
}

/// Amplitude of the branch with `j` humps, found by bisection on the time map.
pub fn amplitude(mu: f64, j: usize) -> Result<f64> {
    let target = std::f64::consts::PI / (2 * j) as f64;
    if time_map(mu, 0.0) >= target {
        return Err(LabError::BranchNotBorn { j, lambda_eff: mu, threshold: (j * j) as f64 });
    }
    // T grows like a logarithm as A → 1, so halve the distance to 1 until it overshoots.
    let mut hi = 0.5;
    while time_map(mu, hi) <= target {
        hi = 0.5 * (1.0 + hi);
        if hi >= 1.0 - 1e-9 {
            return Err(LabError::Numerical(format!("time map never reaches {target} for mu = {mu}")));
        }
    }
    numerics::bisect(|a| time_map(mu, a) - target, 0.0, hi, 1e-15, 200)
}

fn rhs(mu: f64, y: [f64; 2]) -> [f64; 2] {
    [y[1], -mu * (y[0] - y[0] * y[0] * y[0])]
}

/// Samples of the profile at `x_i = iπ/steps`, `i = 0..=steps`, by RK4 from
/// `φ'(0) = ±√(μ(A² − A⁴/2))`.
pub fn profile_samples(mu: f64, j: usize, sign: Sign, steps: usize) -> Result<Vec<f64>> {
    let a = amplitude(mu, j)?;
    let slope = (mu * (a * a - a.powi(4) / 2.0)).sqrt() * sign.factor();
    let h = std::f64::consts::PI / steps as f64;
    let mut y = [0.0, slope];
    let mut out = Vec::with_capacity(steps + 1);
    out.push(0.0);
    for _ in 0..steps {
        let k1 = rhs(mu, y);
        let k2 = rhs(mu, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(mu, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(mu, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(y[0]);
    }
    Ok(out)
}

/// Sine coefficients of a sampled profile by the trapezoidal rule.
pub fn sine_coefficients(samples: &[f64], modes: usize) -> Field {
    let steps = samples.len() - 1;
    let h = std::f64::consts::PI / steps as f64;
    let coeffs = (1..=modes)
        .map(|k| {
            let s: f64 = (1..steps).map(|i| samples[i] * (k as f64 * i as f64 * h).sin()).sum();
            2.0 / std::f64::consts::PI * h * s
        })
        .collect();
    Field::from_raw(coeffs)
}

/// Number of positive eigenvalues of `v'' + μ f'(φ) v` with Dirichlet conditions,
/// from the signs of the `LDLᵀ` pivots of the second-order difference matrix.
pub fn sturm_positive_count(mu: f64, samples: &[f64]) -> usize {
    let steps = samples.len() - 1;
    let h = std::f64::consts::PI / steps as f64;
    let off = 1.0 / (h * h);
    let mut count = 0;
    let mut pivot = f64::INFINITY;
    for &p in &samples[1..steps] {
        let diag = -2.0 * off + mu * (1.0 - 3.0 * p * p);
        pivot = if pivot.is_infinite() { diag } else { diag - off * off / pivot };
        if pivot > 0.0 {
            count += 1;
        }
    }
    count
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalEquilibrium {
    pub label: BranchLabel,
    pub amplitude: f64,
    pub profile: Field,
    pub morse_index: usize,
}

/// All equilibria of the classical problem at `μ` with their instability counts.
pub fn classical_equilibria(mu: f64, modes: usize, steps: usize) -> Result<Vec<ClassicalEquilibrium>> {
    let zero = vec![0.0; steps + 1];
    let mut out = vec![ClassicalEquilibrium {
        label: BranchLabel::Zero,
        amplitude: 0.0,
        profile: Field::zeros(modes),
        morse_index: sturm_positive_count(mu, &zero),
    }];
    let mut j = 1;
    while ((j * j) as f64) < mu {
        for sign in Sign::BOTH {
            let samples = profile_samples(mu, j, sign, steps)?;
            out.push(ClassicalEquilibrium {
                label: BranchLabel::branch(j, sign),
                amplitude: amplitude(mu, j)?,
                profile: sine_coefficients(&samples, modes),
                morse_index: sturm_positive_count(mu, &samples),
            });
        }
        j += 1;
    }
    Ok(out)
}
