//! Linearization `L_ε = L₀ + εB` at an equilibrium, in sine-Galerkin form.
//!
//! For `v = Σ c_k sin kx` the operator acts on coefficient vectors as the
//! symmetric matrix
//!
//! ```text
//! (L₀)_{kl} = −k² δ_{kl} + (λ/a(D)) (2/π) ∫ f'(φ) sin kx sin lx dx
//! B         = (π/2) b bᵀ,   b = sine coefficients of f(φ)
//! ε         = −2 λ² a'(D) / a(D)³
//! ```
//!
//! Eigenvalues share their sign with those of the linearized nonlocal
//! problem, which is `a(D) L_ε`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibria::{BranchLabel, EquilibriumRecord};
use crate::error::{LabError, Result};
use crate::model::ProblemSpec;
use crate::sine::{dealiased_points, galerkin_map, to_grid, Field, SineTable};

pub const TOL_HYP: f64 = 1e-6;
/// Eigenvalues closer than this are reported as one cluster.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub label: BranchLabel,
    pub epsilon: f64,
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    pub positive_count: usize,
    pub hyperbolic: bool,
    pub gap: f64,
    /// Multiplicities of eigenvalue clusters of size > 1, as `(value, size)`.
    pub clusters: Vec<(f64, usize)>,
}

pub fn assemble_l0(spec: &ProblemSpec, eq: &EquilibriumRecord, modes: usize) -> Result<DMatrix<f64>> {
    if modes == 0 {
        return Err(LabError::InvalidInput("K must be positive".into()));
    }
    let phi = eq.profile.resized(modes);
    let points = dealiased_points(modes);
    let g = to_grid(&phi, points)?;
    let f = spec.f;
    let scale = spec.lambda / spec.a.value(eq.d);
    let table = SineTable::get(points, modes);
    let h = std::f64::consts::PI / (points + 1) as f64;
    let weights: Vec<f64> = g.values.iter().map(|&u| f.derivative(u) * h * 2.0 / std::f64::consts::PI * scale).collect();
    let mut m = DMatrix::<f64>::zeros(modes, modes);
    for k in 0..modes {
        for l in k..modes {
            let mut s = 0.0;
            for (i, w) in weights.iter().enumerate() {
                s += w * table.sin(i, k) * table.sin(i, l);
            }
            m[(k, l)] = s;
            m[(l, k)] = s;
        }
        m[(k, k)] -= ((k + 1) * (k + 1)) as f64;
    }
    Ok(m)
}

/// `(ε, b)` with `B = (π/2) b bᵀ`.
pub fn assemble_rank1(spec: &ProblemSpec, eq: &EquilibriumRecord, modes: usize) -> Result<(f64, DVector<f64>)> {
    let phi = eq.profile.resized(modes);
    let f = spec.f;
    let b = galerkin_map(&phi, |u| f.value(u));
    let a = spec.a.value(eq.d);
    let epsilon = -2.0 * spec.lambda * spec.lambda * spec.a.derivative(eq.d) / (a * a * a);
    Ok((epsilon, DVector::from_column_slice(b.coeffs())))
}

pub fn full_matrix(l0: &DMatrix<f64>, epsilon: f64, b: &DVector<f64>) -> DMatrix<f64> {
    let mut m = l0.clone();
    if epsilon != 0.0 {
        m.ger(epsilon * std::f64::consts::FRAC_PI_2, b, b, 1.0);
    }
    m
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn eigen_spectrum(label: BranchLabel, l0: &DMatrix<f64>, epsilon: f64, b: &DVector<f64>) -> SpectrumReport {
    let (eigenvalues, _) = sorted_eigen(full_matrix(l0, epsilon, b));
    report_from(label, epsilon, eigenvalues)
}

fn report_from(label: BranchLabel, epsilon: f64, eigenvalues: Vec<f64>) -> SpectrumReport {
    let positive_count = eigenvalues.iter().filter(|&&mu| mu > TOL_HYP).count();
    let gap = eigenvalues.iter().fold(f64::INFINITY, |g, mu| g.min(mu.abs()));
    let mut clusters = Vec::new();
    let mut i = 0;
    while i < eigenvalues.len() {
        let mut j = i + 1;
        while j < eigenvalues.len() && eigenvalues[j - 1] - eigenvalues[j] < CLUSTER_TOL {
            j += 1;
        }
        if j - i > 1 {
            clusters.push((eigenvalues[i], j - i));
        }
        i = j;
    }
    SpectrumReport { label, epsilon, eigenvalues, positive_count, hyperbolic: gap > TOL_HYP, gap, clusters }
}

pub fn analyze(spec: &ProblemSpec, eq: &EquilibriumRecord, modes: usize) -> Result<SpectrumReport> {
    let l0 = assemble_l0(spec, eq, modes)?;
    let (epsilon, b) = assemble_rank1(spec, eq, modes)?;
    Ok(eigen_spectrum(eq.label, &l0, epsilon, &b))
}

/// Eigenpairs of `L_ε` sorted by descending eigenvalue; vectors are unit in coefficient norm.
pub fn eigenpairs(spec: &ProblemSpec, eq: &EquilibriumRecord, modes: usize) -> Result<Vec<(f64, Field)>> {
    let l0 = assemble_l0(spec, eq, modes)?;
    let (epsilon, b) = assemble_rank1(spec, eq, modes)?;
    let (values, vectors) = sorted_eigen(full_matrix(&l0, epsilon, &b));
    values
        .into_iter()
        .enumerate()
        .map(|(c, mu)| Ok((mu, Field::from_coeffs(vectors.column(c).iter().copied().collect())?)))
        .collect()
}

/// Unstable eigenpairs (eigenvalue above `TOL_HYP`).
pub fn unstable_directions(spec: &ProblemSpec, eq: &EquilibriumRecord, modes: usize) -> Result<Vec<(f64, Field)>> {
    Ok(eigenpairs(spec, eq, modes)?.into_iter().filter(|(mu, _)| *mu > TOL_HYP).collect())
}

/// Dimension of the pointed sphere carrying the Conley index.
pub fn conley_index_dim(report: &SpectrumReport) -> Result<usize> {
    if !report.hyperbolic {
        return Err(LabError::NonHyperbolic { label: report.label.to_string(), gap: report.gap, tol: TOL_HYP });
    }
    Ok(report.positive_count)
}

/// Computes every report and stores the Morse index in each record.
pub fn fill_morse_indices(spec: &ProblemSpec, eqs: &mut [EquilibriumRecord], modes: usize) -> Result<Vec<SpectrumReport>> {
    let reports: Vec<SpectrumReport> = eqs.par_iter().map(|e| analyze(spec, e, modes)).collect::<Result<_>>()?;
    for (e, r) in eqs.iter_mut().zip(&reports) {
        e.morse_index = Some(r.positive_count);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{enumerate_equilibria, solve_nonlocal_equilibrium, Sign};
    use crate::model::{Diffusion, Nonlinearity};
    use std::f64::consts::PI;

    fn constant_spec(lambda: f64) -> ProblemSpec {
        ProblemSpec::new(lambda, Nonlinearity::Cubic, Diffusion::Constant(1.0)).unwrap()
    }

    #[test]
    fn zero_equilibrium_is_diagonal() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let zero = EquilibriumRecord::zero(&spec, 16);
        let m = assemble_l0(&spec, &zero, 16).unwrap();
        for k in 0..16 {
            for l in 0..16 {
                let want = if k == l { 10.0 / spec.a.value(0.0) - ((k + 1) * (k + 1)) as f64 } else { 0.0 };
                assert!((m[(k, l)] - want).abs() < 1e-12);
            }
        }
        let (eps, b) = assemble_rank1(&spec, &zero, 16).unwrap();
        assert!(eps < 0.0);
        assert!(b.amax() == 0.0);
    }

    #[test]
    fn dirichlet_laplacian_shift() {
        let spec = constant_spec(10.0);
        let r = analyze(&spec, &EquilibriumRecord::zero(&spec, 8), 8).unwrap();
        let want: Vec<f64> = (1..=8).map(|k| 10.0 - (k * k) as f64).collect();
        for (a, b) in r.eigenvalues.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(r.positive_count, 3);
        assert_eq!(conley_index_dim(&r).unwrap(), 3);
    }

    #[test]
    fn l0_symmetric_and_rank_one_term() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let eq = solve_nonlocal_equilibrium(&spec, 1, Sign::Plus, 32).unwrap();
        let m = assemble_l0(&spec, &eq, 32).unwrap();
        assert!((&m - m.transpose()).amax() < 1e-12);
        let (eps, b) = assemble_rank1(&spec, &eq, 32).unwrap();
        assert!(eps < 0.0);
        let bb = (&b * b.transpose()) * (eps * PI / 2.0);
        let sv = bb.singular_values();
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        assert!(s[0] > 1e-3 && s[1] < 1e-10);
    }

    #[test]
    fn constant_diffusion_has_no_rank_one_term() {
        let spec = constant_spec(10.0);
        let eq = solve_nonlocal_equilibrium(&spec, 2, Sign::Minus, 32).unwrap();
        assert_eq!(assemble_rank1(&spec, &eq, 32).unwrap().0, 0.0);
    }

    #[test]
    fn morse_indices_at_default_parameters() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let mut eqs = enumerate_equilibria(&spec, 32).unwrap();
        let reports = fill_morse_indices(&spec, &mut eqs, 32).unwrap();
        for (e, r) in eqs.iter().zip(&reports) {
            assert!(r.hyperbolic, "{} gap {}", e.label, r.gap);
            assert_eq!(e.morse_index, Some(e.label.expected_morse_index(3)), "{}", e.label);
        }
    }

    // Eigenvalues of D + ρ z zᵀ solve 1 + ρ Σ z_i² / (d_i − μ) = 0.
    fn secular_roots(d: &[f64], z: &[f64], rho: f64) -> Vec<f64> {
        assert!(rho < 0.0);
        let norm2: f64 = z.iter().map(|v| v * v).sum();
        let w = |mu: f64| 1.0 + rho * d.iter().zip(z).map(|(di, zi)| zi * zi / (di - mu)).sum::<f64>();
        let n = d.len();
        (0..n)
            .map(|i| {
                let hi = d[i];
                let lo = if i + 1 < n { d[i + 1] } else { d[n - 1] + rho * norm2 - 1.0 };
                // w decreases from +∞ at lo⁺ towards −∞ at hi⁻ for ρ < 0
                let (mut a, mut b) = (lo, hi);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if w(m) > 0.0 {
                        a = m
                    } else {
                        b = m
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }

    #[test]
    fn rank_one_interlacing_and_secular_oracle() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        for e in enumerate_equilibria(&spec, 10).unwrap() {
            let l0 = assemble_l0(&spec, &e, 10).unwrap();
            let (eps, b) = assemble_rank1(&spec, &e, 10).unwrap();
            let full = eigen_spectrum(e.label, &l0, eps, &b).eigenvalues;
            let (d, q) = sorted_eigen(l0);
            for (m, d0) in full.iter().zip(&d) {
                assert!(*m <= d0 + 1e-10);
            }
            if eps == 0.0 {
                continue;
            }
            let z: Vec<f64> = (q.transpose() * &b).iter().copied().collect();
            if z.iter().any(|v| v.abs() < 1e-8) {
                continue;
            }
            let roots = secular_roots(&d, &z, eps * PI / 2.0);
            for (r, m) in roots.iter().zip(&full) {
                assert!((r - m).abs() < 1e-8, "{}: {r} vs {m}", e.label);
            }
        }
    }

    #[test]
    fn quadratic_form_matches_direct_quadrature() {
        use rand::{Rng, SeedableRng};
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let eq = solve_nonlocal_equilibrium(&spec, 2, Sign::Plus, 24).unwrap();
        let l0 = assemble_l0(&spec, &eq, 24).unwrap();
        let (eps, b) = assemble_rank1(&spec, &eq, 24).unwrap();
        let m = full_matrix(&l0, eps, &b);
        let a = spec.a.value(eq.d);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let c: Vec<f64> = (0..24).map(|k| rng.random_range(-1.0..1.0) / (1.0 + k as f64)).collect();
            let v = Field::from_coeffs(c.clone()).unwrap();
            let cv = DVector::from_vec(c);
            let matrix_form = PI / 2.0 * cv.dot(&(&m * &cv));
            let n = 20_000;
            let h = PI / n as f64;
            let (mut grad, mut pot, mut proj) = (0.0, 0.0, 0.0);
            for i in 1..n {
                let x = i as f64 * h;
                let (vx, dv, p) = (v.eval(x), v.eval_derivative(x), eq.profile.eval(x));
                grad += dv * dv * h;
                pot += spec.f.derivative(p) * vx * vx * h;
                proj += spec.f.value(p) * vx * h;
            }
            // endpoint terms of the trapezoid rule for (v')²
            grad += 0.5 * h * (v.eval_derivative(0.0).powi(2) + v.eval_derivative(PI).powi(2));
            let direct = -grad + spec.lambda / a * pot + eps * proj * proj;
            assert!((direct - matrix_form).abs() < 1e-8 * (1.0 + direct.abs()), "{direct} vs {matrix_form}");
        }
    }

    #[test]
    fn non_hyperbolic_refused() {
        let spec = constant_spec(4.0);
        let r = analyze(&spec, &EquilibriumRecord::zero(&spec, 8), 8).unwrap();
        assert!(!r.hyperbolic);
        assert!(matches!(conley_index_dim(&r), Err(LabError::NonHyperbolic { .. })));
    }
}
