//! Fourth-order exponential time differencing (Cox–Matthews ETDRK4) for
//! `y' = c ⊙ y + N(y)` with a diagonal linear part, plus an adaptive driver
//! based on step doubling.

use crate::error::{LabError, Result};
use crate::numerics::Flow;

/// A system `y' = diag(c(y_n)) y + N(y)` whose rates are frozen per step.
pub trait StiffSystem: Sync {
    fn dim(&self) -> usize;
    /// Diagonal linear rates, frozen at the start of a step.
    fn rates(&self, y: &[f64]) -> Vec<f64>;
    /// The remainder `F(y) − diag(rates) y`.
    fn remainder(&self, y: &[f64], rates: &[f64]) -> Result<Vec<f64>>;
    /// Weight of component `i` in the squared error norm.
    fn weight(&self, i: usize) -> f64;
    /// Applied after every accepted step.
    fn project(&self, _y: &mut [f64]) {}
}

/// `(φ₁, φ₂, φ₃)(z)` with `φ_k(z) = Σ_n z^n / (n + k)!`.
pub fn phi_functions(z: f64) -> (f64, f64, f64) {
    if z.abs() < 0.5 {
        let (mut p1, mut p2, mut p3) = (0.0, 0.0, 0.0);
        // term_k = z^n / (n + k)!
        let (mut t1, mut t2, mut t3) = (1.0, 0.5, 1.0 / 6.0);
        for n in 0..24 {
            p1 += t1;
            p2 += t2;
            p3 += t3;
            let m = n as f64;
            t1 *= z / (m + 2.0);
            t2 *= z / (m + 3.0);
            t3 *= z / (m + 4.0);
        }
        (p1, p2, p3)
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (e - 1.0 - z) / (z * z);
        let p3 = (e - 1.0 - z - 0.5 * z * z) / (z * z * z);
        (p1, p2, p3)
    }
}

/// One ETDRK4 step of size `h`.
pub fn etdrk4_step<S: StiffSystem + ?Sized>(sys: &S, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = y.len();
    let c = sys.rates(y);
    let mut e = vec![0.0; n];
    let mut e2 = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    let mut f2 = vec![0.0; n];
    let mut f3 = vec![0.0; n];
    for i in 0..n {
        let z = c[i] * h;
        e[i] = z.exp();
        e2[i] = (0.5 * z).exp();
        q[i] = 0.5 * h * phi_functions(0.5 * z).0;
        let (p1, p2, p3) = phi_functions(z);
        f1[i] = h * (p1 - 3.0 * p2 + 4.0 * p3);
        f2[i] = h * 2.0 * (p2 - 2.0 * p3);
        f3[i] = h * (4.0 * p3 - p2);
    }
    let nu = sys.remainder(y, &c)?;
    let a: Vec<f64> = (0..n).map(|i| e2[i] * y[i] + q[i] * nu[i]).collect();
    let na = sys.remainder(&a, &c)?;
    let b: Vec<f64> = (0..n).map(|i| e2[i] * y[i] + q[i] * na[i]).collect();
    let nb = sys.remainder(&b, &c)?;
    let cc: Vec<f64> = (0..n).map(|i| e2[i] * a[i] + q[i] * (2.0 * nb[i] - nu[i])).collect();
    let nc = sys.remainder(&cc, &c)?;
    Ok((0..n).map(|i| e[i] * y[i] + f1[i] * nu[i] + f2[i] * (na[i] + nb[i]) + f3[i] * nc[i]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Local error per step in the weighted norm, relative to `max(1, ‖y‖)`.
    pub tol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { tol: 1e-8, h_init: 1e-3, h_max: 0.25, h_min: 1e-12, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtdRun {
    pub t: f64,
    pub y: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
    pub stopped: bool,
    /// Step size proposed for the next step.
    pub h_next: f64,
}

fn weighted_norm<S: StiffSystem + ?Sized>(sys: &S, v: &[f64]) -> f64 {
    v.iter().enumerate().map(|(i, x)| sys.weight(i) * x * x).sum::<f64>().sqrt()
}

/// Integrates from `t0` to exactly `t1`, calling `observe` after each accepted step.
pub fn integrate<S: StiffSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    t1: f64,
    ctrl: StepControl,
    mut observe: impl FnMut(f64, &[f64]) -> Flow,
) -> Result<EtdRun> {
    if y0.len() != sys.dim() {
        return Err(LabError::SizeMismatch(format!("state has {} components, system {}", y0.len(), sys.dim())));
    }
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut h = ctrl.h_init.min(ctrl.h_max);
    let (mut steps, mut rejected) = (0, 0);
    while t < t1 {
        if steps + rejected >= ctrl.max_steps {
            return Err(LabError::Numerical(format!("step budget exhausted at t = {t}")));
        }
        let last = t + h >= t1;
        let hh = if last { t1 - t } else { h };
        let full = etdrk4_step(sys, &y, hh)?;
        let half = etdrk4_step(sys, &y, 0.5 * hh)?;
        let mut two = etdrk4_step(sys, &half, 0.5 * hh)?;
        if !two.iter().all(|v| v.is_finite()) || !full.iter().all(|v| v.is_finite()) {
            if hh <= ctrl.h_min {
                return Err(LabError::BlowUp { t });
            }
            h = 0.25 * hh;
            rejected += 1;
            continue;
        }
        let diff: Vec<f64> = full.iter().zip(&two).map(|(a, b)| a - b).collect();
        let scale = ctrl.tol * weighted_norm(sys, &two).max(1.0);
        let ratio = weighted_norm(sys, &diff) / scale;
        let factor = if ratio == 0.0 { 2.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 2.0) };
        if ratio <= 1.0 {
            sys.project(&mut two);
            y = two;
            t = if last { t1 } else { t + hh };
            steps += 1;
            if !last || factor < 1.0 {
                h = (hh * factor).min(ctrl.h_max);
            }
            if let Flow::Stop = observe(t, &y) {
                return Ok(EtdRun { t, y, steps, rejected, stopped: true, h_next: h });
            }
        } else {
            if hh <= ctrl.h_min {
                return Err(LabError::Numerical(format!("step size underflow at t = {t}")));
            }
            h = (hh * factor).max(ctrl.h_min);
            rejected += 1;
        }
    }
    Ok(EtdRun { t, y, steps, rejected, stopped: false, h_next: h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_functions_are_continuous_across_the_switch() {
        for z in [0.4999999, -0.4999999] {
            let a = phi_functions(z);
            let b = phi_functions(z * (1.0 + 1e-6));
            assert!((a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-6 && (a.2 - b.2).abs() < 1e-6);
        }
        assert_eq!(phi_functions(0.0), (1.0, 0.5, 1.0 / 6.0));
        let (p1, p2, p3) = phi_functions(-2.0);
        let e = (-2.0f64).exp();
        assert!((p1 - (e - 1.0) / -2.0).abs() < 1e-15);
        assert!((p2 - (e - 1.0 + 2.0) / 4.0).abs() < 1e-15);
        assert!((p3 - (e - 1.0 + 2.0 - 2.0) / -8.0).abs() < 1e-15);
    }

    // y' = −y + sin(t) written autonomously with a clock component.
    struct Forced;
    impl StiffSystem for Forced {
        fn dim(&self) -> usize {
            2
        }
        fn rates(&self, _: &[f64]) -> Vec<f64> {
            vec![-50.0, 0.0]
        }
        fn remainder(&self, y: &[f64], _: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![y[1].sin(), 1.0])
        }
        fn weight(&self, _: usize) -> f64 {
            1.0
        }
    }

    #[test]
    fn forced_stiff_scalar_matches_closed_form() {
        let run = integrate(&Forced, &[1.0, 0.0], 0.0, 3.0, StepControl::default(), |_, _| Flow::Continue).unwrap();
        let t: f64 = 3.0;
        let k = 50.0;
        let particular = (k * t.sin() - t.cos()) / (k * k + 1.0);
        let exact = (1.0 + 1.0 / (k * k + 1.0)) * (-k * t).exp() + particular;
        assert_eq!(run.t, 3.0);
        assert!((run.y[0] - exact).abs() < 1e-8, "{} vs {exact}", run.y[0]);
        assert!((run.y[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |h: f64| {
            let mut y = vec![1.0, 0.0];
            let n = (1.0 / h).round() as usize;
            for _ in 0..n {
                y = etdrk4_step(&Forced, &y, h).unwrap();
            }
            let k = 50.0;
            let t: f64 = 1.0;
            let exact = (1.0 + 1.0 / (k * k + 1.0)) * (-k * t).exp() + (k * t.sin() - t.cos()) / (k * k + 1.0);
            (y[0] - exact).abs()
        };
        let (e1, e2) = (err(0.1), err(0.05));
        assert!(e1 / e2 > 10.0, "ratio {}", e1 / e2);
    }
}
