//! Reference computations written independently of the library: a classical
//! Chafee-Infante solver (time map, RK4 shooting, Sturm sequence) and a few
//! coefficient-space norms.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Quarter period of `v'' + μ(v − v³) = 0` at amplitude `amp`, after `v = amp·sin θ`.
pub fn quarter_period(mu: f64, amp: f64) -> f64 {
    simpson(|t| 1.0 / (mu * (1.0 - amp * amp * (1.0 + t.sin().powi(2)) / 2.0)).sqrt(), 0.0, PI / 2.0, 8192)
}

/// Amplitude of the profile with `j` half-waves on `[0, π]`.
pub fn amplitude(mu: f64, j: usize) -> f64 {
    let target = PI / (2.0 * j as f64);
    let (mut lo, mut hi) = (0.0, 1.0 - 1e-12);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if quarter_period(mu, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Profile values on `x_i = iπ/steps` by classical RK4 from the slope fixed by energy conservation.
pub fn profile(mu: f64, j: usize, sign: f64, steps: usize) -> Vec<f64> {
    let a = amplitude(mu, j);
    // p²/2 + μF(u) = μF(A), F(u) = u²/2 − u⁴/4
    let p0 = sign * (2.0 * mu * (a * a / 2.0 - a.powi(4) / 4.0)).sqrt();
    let f = |u: f64, p: f64| (p, -mu * (u - u * u * u));
    let h = PI / steps as f64;
    let (mut u, mut p) = (0.0, p0);
    let mut out = vec![0.0];
    for _ in 0..steps {
        let (a1, b1) = f(u, p);
        let (a2, b2) = f(u + h / 2.0 * a1, p + h / 2.0 * b1);
        let (a3, b3) = f(u + h / 2.0 * a2, p + h / 2.0 * b2);
        let (a4, b4) = f(u + h * a3, p + h * b3);
        u += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        p += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        out.push(u);
    }
    out
}

/// `c_k = (2/π) ∫ v sin(kx)`, trapezoidal in the samples.
pub fn sine_coeffs(v: &[f64], modes: usize) -> Vec<f64> {
    let n = v.len() - 1;
    let h = PI / n as f64;
    (1..=modes)
        .map(|k| 2.0 / PI * h * (1..n).map(|i| v[i] * (k as f64 * i as f64 * h).sin()).sum::<f64>())
        .collect()
}

/// `‖(u − v)_x‖` for sine coefficient vectors.
pub fn h1_gap(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len().max(v.len());
    let s: f64 = (0..n)
        .map(|i| {
            let d = u.get(i).unwrap_or(&0.0) - v.get(i).unwrap_or(&0.0);
            ((i + 1) as f64 * d).powi(2)
        })
        .sum();
    (PI / 2.0 * s).sqrt()
}

/// Eigenvalues above zero of the difference operator `v'' + μ(1 − 3φ²)v`,
/// counted through the Sturm sequence of its tridiagonal matrix.
pub fn unstable_count(mu: f64, samples: &[f64]) -> usize {
    let n = samples.len() - 2;
    let h = PI / (samples.len() - 1) as f64;
    let e2 = 1.0 / h.powi(4);
    let mut below = 0;
    let mut q = 1.0;
    for (i, phi) in samples[1..=n].iter().enumerate() {
        let d = -2.0 / (h * h) + mu * (1.0 - 3.0 * phi * phi);
        q = if i == 0 { d } else { d - e2 / q };
        if q < 0.0 {
            below += 1;
        }
    }
    n - below
}

/// Sign changes of `u` on a uniform grid of the open interval.
pub fn interior_sign_changes(u: impl Fn(f64) -> f64, points: usize) -> usize {
    let vals: Vec<f64> = (1..points).map(|i| u(PI * i as f64 / points as f64)).filter(|v| v.abs() > 1e-12).collect();
    vals.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}
