//! Sine-Galerkin representation of Dirichlet fields on (0, π).
//!
//! A [`Field`] stores the coefficients `c_1..c_K` of `Σ c_k sin(kx)`, so the
//! boundary values vanish by construction. Nonlinear terms are evaluated by
//! collocation on the interior nodes `x_i = iπ/(P+1)`, `i = 1..P`, where the
//! discrete sine transform is exactly invertible for `P ≥ K`.
//!
//! With `P + 1 > 2K` the collocated cubic of a `K`-mode field has no aliasing
//! into the retained modes, see [`dealiased_points`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Samples below this magnitude are skipped when counting sign changes.
pub const ZERO_SKIP: f64 = 1e-10;
/// A field whose samples all lie below this magnitude has no sign structure.
pub const DEGENERATE_FIELD: f64 = 1e-12;

/// Sine-series coefficients of a function on (0, π) with zero boundary values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr", into = "FieldRepr")]
pub struct Field {
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    #[serde(rename = "K")]
    modes: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<FieldRepr> for Field {
    type Error = LabError;

    fn try_from(repr: FieldRepr) -> Result<Self> {
        if repr.modes != repr.coeffs.len() {
            return Err(LabError::InvalidInput(format!(
                "field declares K = {} but carries {} coefficients",
                repr.modes,
                repr.coeffs.len()
            )));
        }
        Field::from_coeffs(repr.coeffs)
    }
}

impl From<Field> for FieldRepr {
    fn from(f: Field) -> Self {
        FieldRepr { modes: f.coeffs.len(), coeffs: f.coeffs }
    }
}

impl Field {
    pub fn zeros(modes: usize) -> Self {
        Field { coeffs: vec![0.0; modes] }
    }

    /// Builds a field from coefficients, rejecting non-finite values.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(LabError::InvalidInput("field needs at least one mode".into()));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(LabError::InvalidInput(format!("non-finite coefficient c_{}", k + 1)));
        }
        Ok(Field { coeffs })
    }

    /// Unchecked constructor for states already known to be finite.
    pub(crate) fn from_raw(coeffs: Vec<f64>) -> Self {
        Field { coeffs }
    }

    /// `amplitude * sin(mode * x)` truncated to `modes` coefficients.
    pub fn sine_mode(modes: usize, mode: usize, amplitude: f64) -> Self {
        assert!(mode >= 1 && mode <= modes, "mode {mode} outside 1..={modes}");
        let mut coeffs = vec![0.0; modes];
        coeffs[mode - 1] = amplitude;
        Field { coeffs }
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Truncates or zero-pads to `modes` coefficients.
    pub fn resized(&self, modes: usize) -> Field {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(modes, 0.0);
        Field { coeffs }
    }

    /// Point evaluation of the series.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(i, c)| c * ((i + 1) as f64 * x).sin()).sum()
    }

    /// Point evaluation of the derivative.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = (i + 1) as f64;
                c * k * (k * x).cos()
            })
            .sum()
    }

    /// The reflected field `x ↦ u(π − x)`; `sin(k(π−x)) = (−1)^{k+1} sin(kx)`.
    pub fn reflected(&self) -> Field {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 0 { *c } else { -c })
            .collect();
        Field { coeffs }
    }

    /// `L²(0,π)` inner product, `(π/2) Σ c_k d_k`.
    pub fn inner(&self, other: &Field) -> f64 {
        PI / 2.0 * zip_sum(&self.coeffs, &other.coeffs, |a, b| a * b)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.inner(self)
    }

    /// Distance in the `H¹₀` norm `‖(u − v)_x‖`.
    pub fn h1_distance(&self, other: &Field) -> f64 {
        let n = self.modes().max(other.modes());
        let mut s = 0.0;
        for i in 0..n {
            let a = self.coeffs.get(i).copied().unwrap_or(0.0);
            let b = other.coeffs.get(i).copied().unwrap_or(0.0);
            let k = (i + 1) as f64;
            s += k * k * (a - b) * (a - b);
        }
        (PI / 2.0 * s).sqrt()
    }

    pub fn h1_norm(&self) -> f64 {
        h1_seminorm_sq(self).sqrt()
    }

    /// `u + s·v` without allocating twice.
    pub fn axpy(&self, s: f64, v: &Field) -> Field {
        let n = self.modes().max(v.modes());
        let coeffs = (0..n)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or(0.0) + s * v.coeffs.get(i).copied().unwrap_or(0.0)
            })
            .collect();
        Field { coeffs }
    }
}

fn zip_sum(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).sum()
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        Field { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, s: f64) -> Field {
        Field { coeffs: self.coeffs.iter().map(|c| s * c).collect() }
    }
}

/// Values at the collocation nodes `x_i = iπ/(P+1)`, `i = 1..P`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSample {
    pub values: Vec<f64>,
}

impl GridSample {
    pub fn points(&self) -> usize {
        self.values.len()
    }

    /// The nodes matching `points` samples.
    pub fn nodes(points: usize) -> Vec<f64> {
        let h = PI / (points + 1) as f64;
        (1..=points).map(|i| i as f64 * h).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridSample {
        GridSample { values: self.values.iter().map(|v| f(*v)).collect() }
    }

    /// `∫₀^π g dx` by the trapezoid rule on the nodes plus the zero endpoints.
    ///
    /// Exact for `Σ c_m cos(mx)` with `m < 2(P+1)` whenever `g(0) = g(π) = 0`.
    pub fn integral(&self) -> f64 {
        let h = PI / (self.values.len() + 1) as f64;
        h * self.values.iter().sum::<f64>()
    }
}

/// Cached table `sin(k x_i)` for one `(P, K)` pair, stored row-major by node.
#[derive(Debug)]
pub struct SineTable {
    points: usize,
    modes: usize,
    table: Vec<f64>,
}

impl SineTable {
    fn build(points: usize, modes: usize) -> Self {
        let h = PI / (points + 1) as f64;
        let mut table = Vec::with_capacity(points * modes);
        for i in 1..=points {
            for k in 1..=modes {
                // reduce the argument exactly: (i*k) mod 2(P+1)
                let m = (i * k) % (2 * (points + 1));
                table.push((m as f64 * h).sin());
            }
        }
        SineTable { points, modes, table }
    }

    /// Shared table for `(points, modes)`.
    pub fn get(points: usize, modes: usize) -> Arc<SineTable> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SineTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("sine table cache poisoned");
        guard
            .entry((points, modes))
            .or_insert_with(|| Arc::new(SineTable::build(points, modes)))
            .clone()
    }

    /// `sin((k+1) x_{i+1})`, zero-based.
    pub fn sin(&self, i: usize, k: usize) -> f64 {
        self.table[i * self.modes + k]
    }

    pub fn synthesize(&self, coeffs: &[f64], out: &mut [f64]) {
        debug_assert_eq!(coeffs.len(), self.modes);
        for (i, o) in out.iter_mut().enumerate().take(self.points) {
            let row = &self.table[i * self.modes..(i + 1) * self.modes];
            *o = row.iter().zip(coeffs).map(|(s, c)| s * c).sum();
        }
    }

    pub fn analyze(&self, values: &[f64], out: &mut [f64]) {
        debug_assert_eq!(values.len(), self.points);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, v) in values.iter().enumerate() {
            let row = &self.table[i * self.modes..(i + 1) * self.modes];
            for (o, s) in out.iter_mut().zip(row) {
                *o += v * s;
            }
        }
        let scale = 2.0 / (self.points + 1) as f64;
        out.iter_mut().for_each(|o| *o *= scale);
    }
}

/// Grid size used for nonlinear products of `modes`-mode fields.
///
/// `P = 2K` gives `P + 1 > 2K`, which removes aliasing of the cubic into the
/// retained modes; the 3/2 rule only suffices for quadratic products.
pub fn dealiased_points(modes: usize) -> usize {
    2 * modes
}

/// Grid size used for zero counting (four samples per mode).
pub fn lap_points(modes: usize) -> usize {
    4 * modes
}

pub fn to_grid(u: &Field, points: usize) -> Result<GridSample> {
    if points < u.modes() {
        return Err(LabError::Resolution { points, modes: u.modes() });
    }
    let table = SineTable::get(points, u.modes());
    let mut values = vec![0.0; points];
    table.synthesize(u.coeffs(), &mut values);
    Ok(GridSample { values })
}

pub fn from_grid(g: &GridSample, modes: usize) -> Result<Field> {
    if g.points() < modes {
        return Err(LabError::Resolution { points: g.points(), modes });
    }
    let table = SineTable::get(g.points(), modes);
    let mut coeffs = vec![0.0; modes];
    table.analyze(&g.values, &mut coeffs);
    Ok(Field { coeffs })
}

/// Galerkin projection of `g(u)` computed by collocation on the dealiased grid.
pub fn galerkin_map(u: &Field, g: impl Fn(f64) -> f64) -> Field {
    let points = dealiased_points(u.modes());
    let grid = to_grid(u, points).expect("dealiased grid resolves the field");
    from_grid(&grid.map(g), u.modes()).expect("dealiased grid resolves the field")
}

/// `c_k ↦ −k² c_k`.
pub fn second_derivative(u: &Field) -> Field {
    let coeffs = u
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = (i + 1) as f64;
            -k * k * c
        })
        .collect();
    Field { coeffs }
}

/// `‖u_x‖² = (π/2) Σ k² c_k²`.
pub fn h1_seminorm_sq(u: &Field) -> f64 {
    let s: f64 = u
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = (i + 1) as f64;
            k * k * c * c
        })
        .sum();
    PI / 2.0 * s
}

/// Number of strict sign changes of the samples of `u` on `points` nodes.
///
/// Samples with magnitude at most [`ZERO_SKIP`] are skipped.
pub fn lap_number(u: &Field, points: usize) -> Result<usize> {
    if points < 4 * u.modes() {
        return Err(LabError::Resolution { points, modes: u.modes() });
    }
    let grid = to_grid(u, points)?;
    count_sign_changes(&grid.values)
}

pub(crate) fn count_sign_changes(values: &[f64]) -> Result<usize> {
    if values.iter().all(|v| v.abs() < DEGENERATE_FIELD) {
        return Err(LabError::DegenerateField { threshold: DEGENERATE_FIELD });
    }
    let mut last = 0.0_f64;
    let mut changes = 0;
    for &v in values {
        if v.abs() <= ZERO_SKIP {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = v;
    }
    Ok(changes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(c: Vec<f64>) -> Field {
        Field::from_coeffs(c).unwrap()
    }

    #[test]
    fn sin2x_samples_exactly() {
        let u = Field::sine_mode(4, 2, 1.0);
        let g = to_grid(&u, 8).unwrap();
        for (x, v) in GridSample::nodes(8).iter().zip(&g.values) {
            assert!((v - (2.0 * x).sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let u = Field::zeros(16);
        assert_eq!(to_grid(&u, 8), Err(LabError::Resolution { points: 8, modes: 16 }));
        let g = GridSample { values: vec![0.0; 8] };
        assert!(from_grid(&g, 16).is_err());
    }

    #[test]
    fn derivatives_and_norms() {
        let u = Field::sine_mode(5, 1, 1.0);
        assert_eq!(second_derivative(&u).coeffs(), &[-1.0, 0.0, 0.0, 0.0, 0.0]);
        let u3 = Field::sine_mode(5, 3, 1.0);
        assert_eq!(second_derivative(&u3).coeffs()[2], -9.0);
        assert!((h1_seminorm_sq(&u) - PI / 2.0).abs() < 1e-15);
        assert_eq!(h1_seminorm_sq(&Field::zeros(5)), 0.0);
        let both = field(vec![1.0, 1.0, 0.0]);
        assert!((h1_seminorm_sq(&both) - 5.0 * PI / 2.0).abs() < 1e-14);
    }

    // (a sin x + b sin 2x)³ via
    //   sin³x = (3 sin x − sin 3x)/4,   sin²x sin 2x = sin 2x/2 − sin 4x/4,
    //   sin x sin²2x = sin x/2 + sin 3x/4 − sin 5x/4,   sin³2x = (3 sin 2x − sin 6x)/4
    fn exact_cubic_two_modes(a: f64, b: f64) -> Vec<f64> {
        let mut c = vec![0.0; 6];
        c[0] += 0.75 * a * a * a + 1.5 * a * b * b;
        c[2] += -0.25 * a * a * a + 0.75 * a * b * b;
        c[1] += 1.5 * a * a * b + 0.75 * b * b * b;
        c[3] += -0.75 * a * a * b;
        c[4] += -0.75 * a * b * b;
        c[5] += -0.25 * b * b * b;
        c
    }

    #[test]
    fn dealiased_cubic_matches_product_to_sum() {
        let (a, b) = (0.7, -0.4);
        let exact = exact_cubic_two_modes(a, b);
        // K = 6 modes holds the full cubic, so projection is exact at P = 2K
        let u = field(vec![a, b, 0.0, 0.0, 0.0, 0.0]);
        let cube = galerkin_map(&u, |s| s * s * s);
        for (x, y) in cube.coeffs().iter().zip(&exact) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        // truncated to K = 2 the projection keeps the first two coefficients
        let u2 = field(vec![a, b]);
        let cube2 = galerkin_map(&u2, |s| s * s * s);
        assert!((cube2.coeffs()[0] - exact[0]).abs() < 1e-12);
        assert!((cube2.coeffs()[1] - exact[1]).abs() < 1e-12);
    }

    #[test]
    fn three_halves_grid_aliases_the_cubic() {
        // a K-mode field with energy in its top mode: P = 3K/2 folds mode
        // 2(P+1) − 3K back into range, P = 2K does not.
        let k = 8;
        let mut c = vec![0.0; k];
        c[k - 1] = 1.0;
        c[k - 2] = 0.5;
        let u = field(c);
        let cube = |s: f64| s * s * s;
        let fine = from_grid(&to_grid(&u, 6 * k).unwrap().map(cube), k).unwrap();
        let dealiased = galerkin_map(&u, cube);
        let three_halves = from_grid(&to_grid(&u, 3 * k / 2).unwrap().map(cube), k).unwrap();
        assert!(dealiased.h1_distance(&fine) < 1e-12);
        assert!(three_halves.h1_distance(&fine) > 1e-3);
    }

    #[test]
    fn lap_number_examples() {
        let k = 8;
        assert_eq!(lap_number(&Field::sine_mode(k, 1, 1.0), 4 * k).unwrap(), 0);
        assert_eq!(lap_number(&Field::sine_mode(k, 3, 1.0), 4 * k).unwrap(), 2);
        assert!(matches!(lap_number(&Field::zeros(k), 4 * k), Err(LabError::DegenerateField { .. })));
        assert!(lap_number(&Field::zeros(k), 2 * k).is_err());
    }

    #[test]
    fn json_schema() {
        let u = field(vec![1.0, -0.5]);
        let s = serde_json::to_string(&u).unwrap();
        assert_eq!(s, r#"{"K":2,"coeffs":[1.0,-0.5]}"#);
        let back: Field = serde_json::from_str(&s).unwrap();
        assert_eq!(back, u);
        assert!(serde_json::from_str::<Field>(r#"{"K":3,"coeffs":[1.0]}"#).is_err());
    }

    #[test]
    fn reflection_matches_pointwise() {
        let u = field(vec![0.3, -1.1, 0.7, 0.2]);
        let r = u.reflected();
        for x in [0.1, 0.9, 1.7, 2.5] {
            assert!((r.eval(x) - u.eval(PI - x)).abs() < 1e-14);
        }
    }

    fn coeffs_strategy(k: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1.0f64..1.0, k)
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(c in coeffs_strategy(16)) {
            let u = field(c);
            let back = from_grid(&to_grid(&u, 24).unwrap(), 16).unwrap();
            for (a, b) in back.coeffs().iter().zip(u.coeffs()) {
                prop_assert!((a - b).abs() < 1e-13);
            }
        }

        #[test]
        fn parseval_and_integration_by_parts(c in coeffs_strategy(12)) {
            let u = field(c);
            let grid = to_grid(&u, 64).unwrap();
            let l2_grid = grid.map(|v| v * v).integral();
            prop_assert!((l2_grid - u.l2_norm_sq()).abs() < 1e-12 * (1.0 + u.l2_norm_sq()));
            let uxx = second_derivative(&u);
            prop_assert!((uxx.inner(&u) + h1_seminorm_sq(&u)).abs() < 1e-12 * (1.0 + h1_seminorm_sq(&u)));
        }

        #[test]
        fn dealiased_cubic_is_grid_independent(c in coeffs_strategy(10)) {
            let u = field(c);
            let cube = |s: f64| s - s * s * s;
            let a = galerkin_map(&u, cube);
            let b = from_grid(&to_grid(&u, 30).unwrap().map(cube), 10).unwrap();
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                prop_assert!((x - y).abs() < 1e-11);
            }
        }

        #[test]
        fn lap_number_is_odd_invariant(c in coeffs_strategy(6)) {
            let u = field(c);
            prop_assume!(u.h1_norm() > 1e-3);
            let n = lap_number(&u, 24).unwrap();
            prop_assert_eq!(n, lap_number(&-&u, 24).unwrap());
        }
    }
}
