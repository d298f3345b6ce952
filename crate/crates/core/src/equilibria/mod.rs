//! Steady states of the nonlocal problem.
//!
//! A steady state `φ` with `D = ‖φ_x‖²` solves the classical equation
//! `φ'' + (λ / a(D)) f(φ) = 0`. So every branch reduces to a scalar fixed
//! point: with `β(D) = norm_map(λ / a(D), j)` the equilibria on branch `j` are
//! the solutions of `β(D) = D`. Classical profiles are computed by shooting
//! on the initial slope.

pub mod counterexample;
pub mod homotopy;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::model::{self, Nonlinearity, ProblemSpec};
use crate::numerics::{self, Flow, OdeTolerances};
use crate::sine::{self, Field, GridSample};
use crate::spectrum;

/// Shooting integrator tolerances.
pub const SHOOT_ATOL: f64 = 1e-12;
pub const SHOOT_RTOL: f64 = 1e-10;
/// Accepted boundary mismatch `|u(π)|` of a shot profile.
pub const SHOOT_RESIDUAL: f64 = 1e-10;
/// Bracket width at which the `D` bisection stops.
pub const FIXED_POINT_XTOL: f64 = 1e-12;
/// Distance from `a(0)k²` below which `λ` counts as a bifurcation value.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Lower end of the `D` bracket.
pub const D_MIN: f64 = 1e-8;
/// Grid size of the sign-change scan used for non-monotone diffusion.
pub const SCAN_POINTS: usize = 400;

/// Sign of the slope at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

/// Branch label of an equilibrium: zero, or `φ_j^±` with `j ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchLabel {
    Zero,
    Branch { j: usize, sign: Sign },
}

impl BranchLabel {
    pub fn branch(j: usize, sign: Sign) -> Self {
        BranchLabel::Branch { j, sign }
    }

    /// Branch index, `0` for the zero equilibrium.
    pub fn index(&self) -> usize {
        match self {
            BranchLabel::Zero => 0,
            BranchLabel::Branch { j, .. } => *j,
        }
    }

    /// Morse index predicted by the branch label when `N` branches exist.
    pub fn expected_morse_index(&self, n: usize) -> usize {
        match self {
            BranchLabel::Zero => n,
            BranchLabel::Branch { j, .. } => j - 1,
        }
    }
}

impl Ord for BranchLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |l: &BranchLabel| match l {
            BranchLabel::Zero => (0, None),
            BranchLabel::Branch { j, sign } => (*j, Some(*sign)),
        };
        key(self).cmp(&key(other))
    }
}

impl PartialOrd for BranchLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchLabel::Zero => write!(f, "zero"),
            BranchLabel::Branch { j, sign } => write!(f, "phi_{j}^{}", sign.symbol()),
        }
    }
}

/// A computed steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    pub label: BranchLabel,
    pub profile: Field,
    #[serde(rename = "D")]
    pub d: f64,
    pub interior_zeros: usize,
    pub energy: f64,
    pub morse_index: Option<usize>,
}

impl EquilibriumRecord {
    pub fn zero(spec: &ProblemSpec, modes: usize) -> Self {
        let profile = Field::zeros(modes);
        let energy = model::energy(spec, &profile).expect("zero field is valid").value;
        EquilibriumRecord { label: BranchLabel::Zero, profile, d: 0.0, interior_zeros: 0, energy, morse_index: None }
    }

    fn from_profile(spec: &ProblemSpec, label: BranchLabel, profile: Field) -> Result<Self> {
        let d = sine::h1_seminorm_sq(&profile);
        let interior_zeros = sine::lap_number(&profile, sine::lap_points(profile.modes()))?;
        let energy = model::energy(spec, &profile)?.value;
        Ok(EquilibriumRecord { label, profile, d, interior_zeros, energy, morse_index: None })
    }

    /// `‖a(D) φ_xx + λ f(φ)‖` in `L²`.
    pub fn residual(&self, spec: &ProblemSpec) -> f64 {
        model::rhs_nonlocal(spec, &self.profile).map(|r| r.l2_norm_sq().sqrt()).unwrap_or(f64::INFINITY)
    }

    /// `‖φ_xx + λ f(φ)/a(D)‖` in `L²`.
    pub fn semilinear_residual(&self, spec: &ProblemSpec) -> f64 {
        model::rhs_semilinear(spec, &self.profile).map(|r| r.l2_norm_sq().sqrt()).unwrap_or(f64::INFINITY)
    }

    /// `‖φ(π − ·) − (−1)^{j+1} φ‖_{H¹}`; zero for the zero equilibrium.
    pub fn reflection_defect(&self) -> f64 {
        let j = self.label.index();
        let parity = if j % 2 == 1 { 1.0 } else { -1.0 };
        self.profile.reflected().h1_distance(&(&self.profile * parity))
    }
}

/// A shot solution of `u'' = −μ f(u)`, `u(0) = 0`, `u'(0) = slope`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot {
    pub mu: f64,
    pub slope: f64,
    /// `u(π)` of the converged shot.
    pub boundary_value: f64,
}

fn shoot_tolerances() -> OdeTolerances {
    OdeTolerances { atol: SHOOT_ATOL, rtol: SHOOT_RTOL, h_init: 1e-3, h_max: 0.1, max_steps: 200_000 }
}

/// Integrates to `π` and reports `(zeros in (0, π], u(π), escaped)`, stopping
/// as soon as `stop_at` zeros have been seen.
fn shoot_once(f: Nonlinearity, mu: f64, slope: f64, stop_at: usize) -> Result<(usize, f64, bool)> {
    let mut zeros = 0;
    let mut last_sign = slope.signum();
    let mut escaped = false;
    let run = numerics::dopri5(
        |_, y: &[f64; 2]| [y[1], -mu * f.value(y[0])],
        0.0,
        [0.0, slope],
        std::f64::consts::PI,
        shoot_tolerances(),
        |_, y| {
            if y[0].abs() > 1e3 {
                escaped = true;
                return Flow::Stop;
            }
            if y[0] != 0.0 && y[0].signum() != last_sign {
                zeros += 1;
                last_sign = y[0].signum();
                if zeros >= stop_at {
                    return Flow::Stop;
                }
            }
            Flow::Continue
        },
    )?;
    Ok((zeros, run.y[0], escaped))
}

/// Finds the initial slope of the branch-`j` solution with slope sign `sign`.
pub fn shoot_branch(f: Nonlinearity, mu: f64, j: usize, sign: Sign) -> Result<Shot> {
    if j == 0 {
        return Err(LabError::InvalidInput("branch index starts at 1".into()));
    }
    let threshold = (j * j) as f64;
    if !(mu > threshold) {
        return Err(LabError::BranchNotBorn { j, lambda_eff: mu, threshold });
    }
    let s = sign.factor();
    // true while the j-th zero arrives no later than π
    let early = |p: f64| -> Result<bool> {
        let (zeros, _, escaped) = shoot_once(f, mu, s * p, j)?;
        Ok(!escaped && zeros >= j)
    };
    let mut lo = 1e-6 * mu.sqrt();
    if !early(lo)? {
        return Err(LabError::Numerical(format!("branch {j} at mu = {mu}: small-amplitude shot has too few zeros")));
    }
    let mut hi = lo;
    loop {
        hi *= 2.0;
        if !early(hi)? {
            break;
        }
        if hi > 1e6 {
            return Err(LabError::Numerical(format!("shooting bracket not found for branch {j} at mu = {mu}")));
        }
        lo = hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if early(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // hi keeps exactly j − 1 interior zeros
    let (zeros, boundary_value, escaped) = shoot_once(f, mu, s * hi, j)?;
    if escaped || zeros != j - 1 || boundary_value.abs() >= SHOOT_RESIDUAL {
        return Err(LabError::Numerical(format!(
            "shooting for branch {j} at mu = {mu} ended with |u(pi)| = {:e}, {zeros} zeros",
            boundary_value.abs()
        )));
    }
    Ok(Shot { mu, slope: s * hi, boundary_value })
}

/// Samples the shot solution on the collocation nodes of `points`.
pub fn sample_shot(f: Nonlinearity, shot: &Shot, points: usize) -> Result<Vec<f64>> {
    let mu = shot.mu;
    let rhs = |_: f64, y: &[f64; 2]| [y[1], -mu * f.value(y[0])];
    let mut y = [0.0, shot.slope];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(points);
    for x in GridSample::nodes(points) {
        let run = numerics::dopri5(rhs, t, y, x, OdeTolerances { h_init: x - t, ..shoot_tolerances() }, |_, _| Flow::Continue)?;
        y = run.y;
        t = x;
        out.push(y[0]);
    }
    Ok(out)
}

/// Projection grid for shot profiles.
pub fn projection_points(modes: usize) -> usize {
    4 * modes
}

/// Branch-`j` solution of `u'' + μ f(u) = 0`, `u(0) = u(π) = 0`, projected
/// onto `modes` sine modes.
pub fn classical_profile_with(f: Nonlinearity, lambda_eff: f64, j: usize, sign: Sign, modes: usize) -> Result<Field> {
    let shot = shoot_branch(f, lambda_eff, j, sign)?;
    let points = projection_points(modes);
    let samples = sample_shot(f, &shot, points)?;
    sine::from_grid(&GridSample { values: samples }, modes)
}

/// [`classical_profile_with`] for the cubic reaction term.
pub fn classical_profile(lambda_eff: f64, j: usize, sign: Sign, modes: usize) -> Result<Field> {
    classical_profile_with(Nonlinearity::Cubic, lambda_eff, j, sign, modes)
}

/// `‖φ_x‖²` of the branch-`j` classical profile; increasing in `lambda_eff`.
pub fn norm_map_with(f: Nonlinearity, lambda_eff: f64, j: usize, modes: usize) -> Result<f64> {
    Ok(sine::h1_seminorm_sq(&classical_profile_with(f, lambda_eff, j, Sign::Plus, modes)?))
}

pub fn norm_map(lambda_eff: f64, j: usize, modes: usize) -> Result<f64> {
    norm_map_with(Nonlinearity::Cubic, lambda_eff, j, modes)
}

/// `β(D) = norm_map(λ / a(D), j)`, extended by `0` where the branch is not born.
pub fn beta(spec: &ProblemSpec, j: usize, d: f64, modes: usize) -> Result<f64> {
    let mu = spec.lambda / spec.a.value(d);
    if mu <= (j * j) as f64 {
        return Ok(0.0);
    }
    norm_map_with(spec.f, mu, j, modes)
}

/// Largest value `β` can take: the norm at effective parameter `λ / m`.
pub fn d_max(spec: &ProblemSpec, j: usize, modes: usize) -> Result<f64> {
    let (m, _) = spec.bounds();
    norm_map_with(spec.f, spec.lambda / m, j, modes)
}

/// Number of branches `N = max{k : a(0)k² < λ}`, rejecting bifurcation values.
pub fn branch_count(spec: &ProblemSpec) -> Result<usize> {
    let a0 = spec.a.value(0.0);
    let mut n = 0;
    loop {
        let k = n + 1;
        let critical = a0 * (k * k) as f64;
        if (spec.lambda - critical).abs() < DEGENERACY_TOL {
            return Err(LabError::DegenerateParameter { lambda: spec.lambda, k, tol: DEGENERACY_TOL });
        }
        if critical >= spec.lambda {
            return Ok(n);
        }
        n = k;
    }
}

fn record_at(spec: &ProblemSpec, j: usize, sign: Sign, d_star: f64, modes: usize) -> Result<EquilibriumRecord> {
    let mu = spec.lambda / spec.a.value(d_star);
    let profile = classical_profile_with(spec.f, mu, j, sign, modes)?;
    let label = BranchLabel::branch(j, sign);
    EquilibriumRecord::from_profile(spec, label, polish(spec, label, profile))
}

/// Newton refinement of `φ_xx + λ f(φ)/a(‖φ_x‖²) = 0` in the retained modes.
///
/// The Jacobian is the linearization matrix at the current iterate. Steps
/// that do not reduce the residual are discarded.
pub fn polish(spec: &ProblemSpec, label: BranchLabel, profile: Field) -> Field {
    let residual = |u: &Field| model::rhs_semilinear(spec, u).map(|r| r.l2_norm_sq().sqrt()).unwrap_or(f64::INFINITY);
    let modes = profile.modes();
    let mut u = profile;
    let mut res = residual(&u);
    for _ in 0..8 {
        if res < 1e-13 {
            break;
        }
        let rec = EquilibriumRecord {
            label,
            d: sine::h1_seminorm_sq(&u),
            profile: u.clone(),
            interior_zeros: 0,
            energy: 0.0,
            morse_index: None,
        };
        let (Ok(l0), Ok((eps, b)), Ok(r)) = (
            spectrum::assemble_l0(spec, &rec, modes),
            spectrum::assemble_rank1(spec, &rec, modes),
            model::rhs_semilinear(spec, &u),
        ) else {
            break;
        };
        let jac = spectrum::full_matrix(&l0, eps, &b);
        let rhs = nalgebra::DVector::from_iterator(modes, r.coeffs().iter().map(|v| -v));
        let Some(step) = jac.lu().solve(&rhs) else { break };
        let Ok(step) = Field::from_coeffs(step.iter().copied().collect()) else { break };
        let next = &u + &step;
        let next_res = residual(&next);
        if !(next_res < res) {
            break;
        }
        u = next;
        res = next_res;
    }
    u
}

/// Unique fixed point `D*` of `β(D) = D` on branch `j` for monotone `a`.
pub fn solve_fixed_point(spec: &ProblemSpec, j: usize, modes: usize) -> Result<f64> {
    let threshold = spec.a.value(0.0) * (j * j) as f64;
    if !(spec.lambda > threshold) {
        return Err(LabError::BranchNotBorn { j, lambda_eff: spec.lambda / spec.a.value(0.0), threshold: (j * j) as f64 });
    }
    let hi = d_max(spec, j, modes)?;
    let lo = D_MIN.min(hi);
    let g = |d: f64| beta(spec, j, d, modes).map(|b| b - d);
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo.signum() == ghi.signum() {
        return Err(LabError::FixedPointNotFound { j, lo, hi });
    }
    let mut failure = None;
    let root = numerics::bisect(
        |d| match g(d) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        FIXED_POINT_XTOL,
        200,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(root)
}

/// All fixed points of `β(D) = D` on branch `j`, located by a sign-change
/// scan on [`SCAN_POINTS`] points of `[D_MIN, 1.05 D_max]` and refined by
/// bisection.
pub fn scan_fixed_points(spec: &ProblemSpec, j: usize, modes: usize) -> Result<Vec<f64>> {
    let hi = 1.05 * d_max(spec, j, modes)?;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| D_MIN + (hi - D_MIN) * i as f64 / (SCAN_POINTS - 1) as f64).collect();
    let values = grid.iter().map(|d| beta(spec, j, *d, modes).map(|b| b - d)).collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            roots.push(grid[i]);
        } else if a.signum() != b.signum() && b != 0.0 {
            let mut failure = None;
            let r = numerics::bisect(
                |d| match beta(spec, j, d, modes) {
                    Ok(v) => v - d,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                },
                grid[i],
                grid[i + 1],
                FIXED_POINT_XTOL,
                200,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            roots.push(r);
        }
    }
    Ok(roots)
}

/// The equilibrium on branch `(j, sign)` of the nonlocal problem (monotone `a`).
pub fn solve_nonlocal_equilibrium(spec: &ProblemSpec, j: usize, sign: Sign, modes: usize) -> Result<EquilibriumRecord> {
    let d_star = solve_fixed_point(spec, j, modes)?;
    record_at(spec, j, sign, d_star, modes)
}

/// All equilibria on branch `(j, sign)`, scanning when `a` is not monotone.
pub fn branch_equilibria(spec: &ProblemSpec, j: usize, sign: Sign, modes: usize) -> Result<Vec<EquilibriumRecord>> {
    if spec.a.is_monotone() {
        Ok(vec![solve_nonlocal_equilibrium(spec, j, sign, modes)?])
    } else {
        scan_fixed_points(spec, j, modes)?.into_iter().map(|d| record_at(spec, j, sign, d, modes)).collect()
    }
}

/// Every equilibrium, sorted by label: `2N + 1` records for monotone `a`.
pub fn enumerate_equilibria(spec: &ProblemSpec, modes: usize) -> Result<Vec<EquilibriumRecord>> {
    let n = branch_count(spec)?;
    let mut out = vec![EquilibriumRecord::zero(spec, modes)];
    for j in 1..=n {
        let plus = branch_equilibria(spec, j, Sign::Plus, modes)?;
        // φ_j^− is shot independently rather than negated
        let minus = branch_equilibria(spec, j, Sign::Minus, modes)?;
        out.extend(plus);
        out.extend(minus);
    }
    out.sort_by(|a, b| a.label.cmp(&b.label).then(a.d.total_cmp(&b.d)));
    Ok(out)
}

/// Slope of `β` at `d` by central differences.
pub fn beta_slope(spec: &ProblemSpec, j: usize, d: f64, modes: usize) -> Result<f64> {
    let h = 1e-4 * (1.0 + d);
    Ok((beta(spec, j, d + h, modes)? - beta(spec, j, (d - h).max(0.0), modes)?) / (d + h - (d - h).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Diffusion;
    use std::f64::consts::PI;

    const K: usize = 64;

    // Time-map oracle: for the positive hump of u'' + μ(u − u³) = 0 with
    // maximum A, the quarter period is ∫₀^{π/2} dθ / √(μ(1 − A²(1 + sin²θ)/2)).
    fn quarter_period(mu: f64, amp: f64) -> f64 {
        let (x, w) = numerics::gauss_legendre(64);
        x.iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let th = PI / 4.0 * (xi + 1.0);
                PI / 4.0 * wi / (mu * (1.0 - amp * amp * (1.0 + th.sin().powi(2)) / 2.0)).sqrt()
            })
            .sum()
    }

    fn oracle_amplitude(mu: f64, j: usize) -> f64 {
        numerics::bisect(|a| quarter_period(mu, a) - PI / (2.0 * j as f64), 1e-9, 1.0 - 1e-15, 1e-15, 200).unwrap()
    }

    #[test]
    fn branch_not_born() {
        assert!(matches!(classical_profile(0.5, 1, Sign::Plus, K), Err(LabError::BranchNotBorn { .. })));
        assert!(matches!(classical_profile(4.0, 2, Sign::Plus, K), Err(LabError::BranchNotBorn { .. })));
    }

    #[test]
    fn j2_profile_is_odd_about_midpoint() {
        let u = classical_profile(4.5, 2, Sign::Plus, K).unwrap();
        assert!(u.eval(PI / 2.0).abs() < 1e-9);
        assert!(u.reflected().h1_distance(&-&u) < 1e-8);
    }

    #[test]
    fn amplitude_matches_time_map() {
        let u = classical_profile(10.0, 1, Sign::Plus, K).unwrap();
        let amp = u.eval(PI / 2.0);
        let oracle = oracle_amplitude(10.0, 1);
        assert!((amp - oracle).abs() < 1e-8, "{amp} vs {oracle}");
    }

    #[test]
    fn norm_map_increases_and_vanishes_at_birth() {
        let v: Vec<f64> = [2.0, 3.0, 5.0].iter().map(|m| norm_map(*m, 1, K).unwrap()).collect();
        assert!(v[0] < v[1] && v[1] < v[2]);
        assert!(norm_map(1.0 + 1e-3, 1, K).unwrap() < 0.1);
        let direct = sine::h1_seminorm_sq(&classical_profile(10.0, 1, Sign::Plus, K).unwrap());
        assert_eq!(norm_map(10.0, 1, K).unwrap(), direct);
    }

    #[test]
    fn constant_diffusion_reproduces_classical_branch() {
        let spec = ProblemSpec::new(10.0, Nonlinearity::Cubic, Diffusion::Constant(1.0)).unwrap();
        let rec = solve_nonlocal_equilibrium(&spec, 2, Sign::Plus, K).unwrap();
        let classical = classical_profile(10.0, 2, Sign::Plus, K).unwrap();
        assert!(rec.profile.h1_distance(&classical) < 1e-8);
        assert!((rec.d - norm_map(10.0, 2, K).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn default_fixed_points_are_certified() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        for j in 1..=3 {
            let d = solve_fixed_point(&spec, j, K).unwrap();
            let b = beta(&spec, j, d, K).unwrap();
            assert!((b - d).abs() < 1e-10, "j={j}: {}", (b - d).abs());
            assert!(beta_slope(&spec, j, d, K).unwrap() <= 0.0);
            let rec = record_at(&spec, j, Sign::Plus, d, K).unwrap();
            assert!(rec.residual(&spec) < 1e-8, "residual {}", rec.residual(&spec));
            assert!(rec.semilinear_residual(&spec) < 1e-8);
            assert_eq!(rec.interior_zeros, j - 1);
            assert!(rec.reflection_defect() < 1e-8);
            assert!(rec.profile.eval_derivative(0.0) > 0.0);
        }
        assert!(matches!(solve_fixed_point(&spec, 4, K), Err(LabError::BranchNotBorn { .. })));
    }

    #[test]
    fn beta_is_non_increasing_for_monotone_a() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let hi = d_max(&spec, 1, K).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let d = D_MIN + (hi - D_MIN) * i as f64 / 49.0;
            let b = beta(&spec, 1, d, K).unwrap();
            assert!(b <= prev + 1e-10);
            prev = b;
        }
    }

    #[test]
    fn enumeration_counts() {
        let spec = ProblemSpec::default_with_lambda(0.5).unwrap();
        assert_eq!(enumerate_equilibria(&spec, K).unwrap().len(), 1);
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let eqs = enumerate_equilibria(&spec, K).unwrap();
        assert_eq!(eqs.len(), 7);
        assert_eq!(eqs[0].label, BranchLabel::Zero);
        // energy ordering E(0) > E(φ_3) > E(φ_2) > E(φ_1)
        let e = |j: usize| eqs.iter().find(|r| r.label == BranchLabel::branch(j, Sign::Plus)).unwrap().energy;
        assert!(eqs[0].energy > e(3) && e(3) > e(2) && e(2) > e(1));
        for j in 1..=3 {
            let p = eqs.iter().find(|r| r.label == BranchLabel::branch(j, Sign::Plus)).unwrap();
            let m = eqs.iter().find(|r| r.label == BranchLabel::branch(j, Sign::Minus)).unwrap();
            assert!(p.profile.h1_distance(&-&m.profile) < 1e-10);
            assert!((p.energy - m.energy).abs() < 1e-8 * (1.0 + p.energy.abs()));
        }
    }

    #[test]
    fn bifurcation_value_is_degenerate() {
        let spec = ProblemSpec::default_with_lambda(9.0).unwrap();
        assert!(matches!(enumerate_equilibria(&spec, K), Err(LabError::DegenerateParameter { k: 3, .. })));
    }

    #[test]
    fn labels_sort_zero_first() {
        let mut v = vec![BranchLabel::branch(2, Sign::Minus), BranchLabel::Zero, BranchLabel::branch(1, Sign::Plus)];
        v.sort();
        assert_eq!(v, vec![BranchLabel::Zero, BranchLabel::branch(1, Sign::Plus), BranchLabel::branch(2, Sign::Minus)]);
        assert_eq!(BranchLabel::branch(3, Sign::Minus).to_string(), "phi_3^-");
    }
}
