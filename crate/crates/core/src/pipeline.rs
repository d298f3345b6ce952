//! Complete experiments driven by a [`RunConfig`].
//!
//! Every command-line subcommand is a function here returning a serializable
//! result; the binary only parses flags, writes files and maps exit codes.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::crosscheck;
use crate::dynamics::{self, ConnectionSearch, DynamicsConfig, Form, RunOptions, Terminal};
use crate::equilibria::counterexample::{build_counterexample_a, counterexample_spec, positive_equilibria};
use crate::equilibria::homotopy::{continue_in_tau, uniform_tau_grid, TauContinuation};
use crate::equilibria::{
    branch_count, enumerate_equilibria, norm_map_with, solve_fixed_point, BranchLabel, EquilibriumRecord, Sign,
};
use crate::error::{LabError, Result};
use crate::model::{Diffusion, Nonlinearity, ProblemSpec};
use crate::modelflow::{conjugacy_graph_check, model_connection_graph, ModelConfig, ModelGraphRun};
use crate::morse::{
    assemble_connection_matrix, build_labels, check_consistency, predicted_graph, ConnectionGraph, ConsistencyReport,
    GradedMatrix,
};
use crate::spectrum::{self, SpectrumReport};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ATTRACTOR_LAB_THREADS";

/// Worker cap from [`THREADS_ENV`], if set to a positive integer.
pub fn worker_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(LabError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Runs `f` on a pool limited by [`THREADS_ENV`], or on the global pool.
pub fn with_worker_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match worker_cap()? {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Equilibria of the configured problem with Morse indices filled in.
pub fn equilibria(cfg: &RunConfig) -> Result<Vec<EquilibriumRecord>> {
    let spec = cfg.spec()?;
    indexed_equilibria(&spec, cfg.modes()).map(|(e, _)| e)
}

fn indexed_equilibria(spec: &ProblemSpec, modes: usize) -> Result<(Vec<EquilibriumRecord>, Vec<SpectrumReport>)> {
    let mut eqs = enumerate_equilibria(spec, modes)?;
    let reports = spectrum::fill_morse_indices(spec, &mut eqs, modes)?;
    Ok((eqs, reports))
}

/// Spectra of every equilibrium, or of the one labeled `branch`.
pub fn spectra(cfg: &RunConfig, branch: Option<BranchLabel>) -> Result<Vec<SpectrumReport>> {
    let spec = cfg.spec()?;
    let (_, reports) = indexed_equilibria(&spec, cfg.modes())?;
    match branch {
        None => Ok(reports),
        Some(label) => {
            let r: Vec<_> = reports.into_iter().filter(|r| r.label == label).collect();
            if r.is_empty() {
                return Err(LabError::InvalidInput(format!("no equilibrium {label} at lambda = {}", spec.lambda)));
            }
            Ok(r)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectOutput {
    pub lambda: f64,
    pub searches: Vec<ConnectionSearch>,
    pub graph: ConnectionGraph,
    /// One monitored nonlocal trajectory per source, as `t,energy,lap,distance` CSV.
    #[serde(skip)]
    pub trajectories: Vec<(BranchLabel, String)>,
}

fn searches_for(
    spec: &ProblemSpec,
    eqs: &[EquilibriumRecord],
    source: Option<BranchLabel>,
    dcfg: &DynamicsConfig,
) -> Result<Vec<ConnectionSearch>> {
    match source {
        None => dynamics::all_connections(spec, eqs, dcfg),
        Some(label) => {
            let src = eqs
                .iter()
                .find(|e| e.label == label)
                .ok_or_else(|| LabError::InvalidInput(format!("no equilibrium {label} at lambda = {}", spec.lambda)))?;
            Ok(vec![dynamics::find_connections(spec, src, eqs, dcfg)?])
        }
    }
}

/// Connection search from every unstable equilibrium, or from `source` only.
pub fn connect(cfg: &RunConfig, source: Option<BranchLabel>) -> Result<ConnectOutput> {
    let spec = cfg.spec()?;
    let dcfg = cfg.dynamics();
    let (eqs, _) = indexed_equilibria(&spec, cfg.modes())?;
    let n = (eqs.len() - 1) / 2;
    let searches = searches_for(&spec, &eqs, source, &dcfg)?;
    let graph = ConnectionGraph::from_searches(n, &searches)?;
    let trajectories = searches
        .par_iter()
        .map(|s| {
            let src = eqs.iter().find(|e| e.label == s.source).expect("source is an equilibrium");
            let (_, v) = spectrum::unstable_directions(&spec, src, cfg.modes())?.into_iter().next().expect("unstable");
            let u0 = src.profile.axpy(dcfg.delta_dep / v.h1_norm(), &v);
            let opts = RunOptions { exclude: Some(s.source), stop_on_capture: true, ..RunOptions::default() };
            let log = dynamics::run_trajectory(&spec, Form::Nonlocal, &u0, dcfg.t_max, &eqs, &dcfg, &opts)?;
            Ok((s.source, log.to_csv()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConnectOutput { lambda: spec.lambda, searches, graph, trajectories })
}

#[derive(Debug, Clone, Serialize)]
pub struct MorseCheck {
    pub lambda: f64,
    pub n: usize,
    pub graph: ConnectionGraph,
    pub predicted: ConnectionGraph,
    pub matrix: GradedMatrix,
    pub consistency: ConsistencyReport,
    pub unresolved: usize,
    pub squares_to_zero: bool,
    pub degree_minus_one: bool,
    pub triangular: bool,
    pub passed: bool,
}

/// Detected graph, connection matrix and their consistency at the configured problem.
pub fn morse_check(cfg: &RunConfig) -> Result<MorseCheck> {
    let spec = cfg.spec()?;
    let (eqs, _) = indexed_equilibria(&spec, cfg.modes())?;
    let labels = build_labels(&eqs)?;
    let n = labels.n;
    if n == 0 {
        return Err(LabError::Precondition("connection matrix needs at least one branch".into()));
    }
    let searches = dynamics::all_connections(&spec, &eqs, &cfg.dynamics())?;
    let graph = ConnectionGraph::from_searches(n, &searches)?;
    let unresolved = searches.iter().map(|s| s.unresolved).sum();
    morse_check_from(spec.lambda, graph, unresolved)
}

fn morse_check_from(lambda: f64, graph: ConnectionGraph, unresolved: usize) -> Result<MorseCheck> {
    let n = graph.n;
    let predicted = predicted_graph(n);
    let matrix = assemble_connection_matrix(n)?;
    let consistency = check_consistency(&graph, &matrix, &predicted)?;
    let squares_to_zero = matrix.squares_to_zero();
    let degree_minus_one = matrix.has_degree_minus_one();
    let triangular = matrix.is_triangular_in(&predicted.transitive_closure());
    let passed = consistency.passed && squares_to_zero && degree_minus_one && triangular && unresolved == 0;
    Ok(MorseCheck {
        lambda,
        n,
        graph,
        predicted,
        matrix,
        consistency,
        unresolved,
        squares_to_zero,
        degree_minus_one,
        triangular,
        passed,
    })
}

/// Connection graph of the model flow on the `n`-disk.
pub fn modelflow(n: usize, cfg: &ModelConfig) -> Result<ModelGraphRun> {
    model_connection_graph(n, cfg)
}

/// Continuation of every equilibrium from constant diffusion (`τ = 0`) to `a` (`τ = 1`).
pub fn continue_tau(cfg: &RunConfig, steps: usize) -> Result<TauContinuation> {
    if steps == 0 {
        return Err(LabError::InvalidInput("tau grid needs at least one step".into()));
    }
    let spec = cfg.spec()?;
    let n = branch_count(&spec)?;
    if n == 0 {
        return Err(LabError::Precondition("tau continuation needs at least one branch".into()));
    }
    continue_in_tau(&spec, BranchLabel::branch(n, Sign::Plus), &uniform_tau_grid(steps), cfg.modes())
}

/// Minimum distance of a sweep point from every bifurcation value `a(0)k²`.
pub const SWEEP_EXCLUSION: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub count: usize,
    pub label: BranchLabel,
    #[serde(rename = "D")]
    pub d: f64,
    pub energy: f64,
    pub morse_index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// Grid points too close to a bifurcation value.
    pub skipped: Vec<f64>,
}

impl Sweep {
    /// Equilibrium count per retained grid point, in grid order.
    pub fn counts(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for r in &self.rows {
            if out.last().map(|&(l, _)| l) != Some(r.lambda) {
                out.push((r.lambda, r.count));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,count,label,D,energy,morse_index\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{},{},{}\n", r.lambda, r.count, r.label, r.d, r.energy, r.morse_index));
        }
        s
    }
}

/// Equilibria, energies and Morse indices along a `λ` grid.
pub fn sweep(cfg: &RunConfig, grid: &[f64]) -> Result<Sweep> {
    let base = cfg.spec()?;
    let a0 = base.a.value(0.0);
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for &lambda in grid {
        let k = (lambda / a0).sqrt().round().max(1.0);
        if (lambda - a0 * k * k).abs() < SWEEP_EXCLUSION {
            eprintln!("warning: skipping lambda = {lambda}, within {SWEEP_EXCLUSION:e} of a(0)*{k}^2");
            skipped.push(lambda);
        } else {
            kept.push(lambda);
        }
    }
    let per: Vec<Vec<SweepRow>> = kept
        .par_iter()
        .map(|&lambda| {
            let spec = base.with_lambda(lambda)?;
            let (eqs, _) = indexed_equilibria(&spec, cfg.modes())?;
            let count = eqs.len();
            Ok(eqs
                .into_iter()
                .map(|e| SweepRow {
                    lambda,
                    count,
                    label: e.label,
                    d: e.d,
                    energy: e.energy,
                    morse_index: e.morse_index.expect("filled"),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(Sweep { rows: per.into_iter().flatten().collect(), skipped })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub delta: f64,
    #[serde(rename = "J")]
    pub slope: f64,
    pub d_bar: f64,
    /// `D` of each positive equilibrium found.
    pub d: Vec<f64>,
    /// Positive eigenvalue count of each.
    pub positive_eigenvalues: Vec<usize>,
    /// At least three positive equilibria, one of them unstable.
    pub success: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleScan {
    pub lambda: f64,
    pub d_star: f64,
    pub d0: f64,
    pub delta0: f64,
    /// `a(d*) − a(0)`; `Jδ` must stay below it.
    pub room: f64,
    pub points: Vec<ScanPoint>,
    pub passed: bool,
}

/// Fractions of `δ₀` and of `room / δ` spanned by the default scan.
pub const SCAN_DELTA_FRACTIONS: [f64; 3] = [0.25, 0.5, 0.75];
pub const SCAN_SLOPE_FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 0.9];

fn counterexample_base(cfg: &RunConfig) -> Result<ProblemSpec> {
    ProblemSpec::new(cfg.model.lambda, cfg.model.f, Diffusion::Saturating)
}

/// The documented `(δ, J)` grid for the configured `λ`.
pub fn default_scan_grid(cfg: &RunConfig) -> Result<Vec<(f64, f64)>> {
    let base = counterexample_base(cfg)?;
    let (delta0, room) = scan_scales(&base, cfg.modes())?;
    let mut grid = Vec::new();
    for fd in SCAN_DELTA_FRACTIONS {
        let delta = fd * delta0;
        for fj in SCAN_SLOPE_FRACTIONS {
            grid.push((delta, fj * room / delta));
        }
    }
    Ok(grid)
}

fn scan_scales(base: &ProblemSpec, modes: usize) -> Result<(f64, f64)> {
    let d_star = solve_fixed_point(base, 1, modes)?;
    let d0 = norm_map_with(base.f, base.lambda / base.a.value(0.0), 1, modes)?;
    Ok(((d0 - d_star) / 4.0, base.a.value(d_star) - base.a.value(0.0)))
}

/// Positive equilibria and their instability for the diffusion `c_δ` over a `(δ, J)` grid.
pub fn counterexample(cfg: &RunConfig, grid: &[(f64, f64)]) -> Result<CounterexampleScan> {
    let base = counterexample_base(cfg)?;
    let modes = cfg.modes();
    let d_star = solve_fixed_point(&base, 1, modes)?;
    let d0 = norm_map_with(base.f, base.lambda / base.a.value(0.0), 1, modes)?;
    let (delta0, room) = scan_scales(&base, modes)?;
    let points: Vec<ScanPoint> = grid
        .par_iter()
        .map(|&(delta, slope)| {
            let c = build_counterexample_a(&base, delta, slope, modes)?;
            let spec = counterexample_spec(&base, &c)?;
            let eqs = positive_equilibria(&base, &c, modes)?;
            let positive_eigenvalues = eqs
                .iter()
                .map(|e| spectrum::analyze(&spec, e, modes).map(|r| r.positive_count))
                .collect::<Result<Vec<_>>>()?;
            let success = eqs.len() >= 3 && positive_eigenvalues.iter().any(|&p| p > 0);
            Ok(ScanPoint { delta, slope, d_bar: c.d_bar, d: eqs.iter().map(|e| e.d).collect(), positive_eigenvalues, success })
        })
        .collect::<Result<_>>()?;
    let passed = points.iter().any(|p| p.success);
    Ok(CounterexampleScan { lambda: base.lambda, d_star, d0, delta0, room, points, passed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub status: Status,
    pub tolerance: String,
    pub detail: String,
    pub measured: Value,
}

impl Criterion {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub lambda: f64,
    #[serde(rename = "K")]
    pub modes: usize,
    #[serde(rename = "N")]
    pub branches: usize,
    pub equilibria: Vec<String>,
    pub criteria: Vec<Criterion>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        self.criteria
            .iter()
            .map(|c| {
                let s = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::NotApplicable => "N/A ",
                };
                format!("{s} {:>2} {}: {}\n", c.id, c.name, c.detail)
            })
            .collect()
    }
}

/// Outcome of one check before it is labeled.
struct Outcome {
    status: Status,
    detail: String,
    measured: Value,
}

impl Outcome {
    fn check(ok: bool, detail: impl Into<String>, measured: Value) -> Self {
        Outcome { status: if ok { Status::Pass } else { Status::Fail }, detail: detail.into(), measured }
    }

    fn not_applicable(detail: impl Into<String>) -> Self {
        Outcome { status: Status::NotApplicable, detail: detail.into(), measured: Value::Null }
    }
}

/// Steps of the classical RK4 oracle across `[0, π]`.
pub const CLASSICAL_STEPS: usize = 20_000;
/// Agreement required between Galerkin and classical profiles.
pub const CLASSICAL_TOL: f64 = 1e-6;
pub const SYMMETRY_TOL: f64 = 1e-8;
pub const GAP_WITNESS: f64 = 1e-3;
pub const RANK_TOL: f64 = 1e-10;
pub const ENERGY_STEP_TOL: f64 = 1e-8;
pub const ENERGY_PAIR_TOL: f64 = 1e-8;
pub const RECLOCK_TOL: f64 = 1e-5;
pub const RANDOM_TRAJECTORIES: usize = 20;
pub const RECLOCK_FIELDS: usize = 3;
pub const RECLOCK_HORIZON: f64 = 2.0;
pub const TAU_STEPS: usize = 10;
/// Largest `N` for which connection matrices are assembled.
pub const MATRIX_N_MAX: usize = 6;

struct Shared<'a> {
    cfg: &'a RunConfig,
    spec: ProblemSpec,
    n: usize,
    eqs: Vec<EquilibriumRecord>,
    reports: Vec<SpectrumReport>,
    searches: Vec<ConnectionSearch>,
    graph: ConnectionGraph,
}

fn guard(id: u8, name: &'static str, tolerance: impl Into<String>, f: impl FnOnce() -> Result<Outcome>) -> Criterion {
    let o = f().unwrap_or_else(|e| Outcome::check(false, format!("error: {e}"), Value::Null));
    Criterion { id, name, status: o.status, tolerance: tolerance.into(), detail: o.detail, measured: o.measured }
}

/// Runs the full pipeline and checks every criterion.
///
/// Errors while enumerating equilibria at the configured `λ` are returned;
/// later failures are recorded in the report.
pub fn verify_paper(cfg: &RunConfig) -> Result<VerifyReport> {
    let spec = cfg.spec()?;
    let modes = cfg.modes();
    let (eqs, reports) = indexed_equilibria(&spec, modes)?;
    let n = (eqs.len() - 1) / 2;
    let searches = if n > 0 { dynamics::all_connections(&spec, &eqs, &cfg.dynamics())? } else { Vec::new() };
    let graph = ConnectionGraph::from_searches(n, &searches)?;
    let sh = Shared { cfg, spec, n, eqs, reports, searches, graph };

    let criteria = vec![
        guard(1, "equilibrium count", "exact", || c1_counts(&sh)),
        guard(2, "zeros and symmetries", format!("{SYMMETRY_TOL:e} in H1"), || c2_symmetry(&sh)),
        guard(3, "Morse indices", format!("gap > {GAP_WITNESS:e}; K and 2K agree"), || c3_indices(&sh)),
        guard(4, "rank-one term", format!("sigma_2 < {RANK_TOL:e}"), || c4_rank_one(&sh)),
        guard(5, "Lyapunov behavior", format!("energy step < {ENERGY_STEP_TOL:e}"), || c5_lyapunov(&sh)),
        guard(6, "connection graph", "exact", || c6_graph(&sh)),
        guard(7, "connection matrix", "exact", || c7_matrix(&sh)),
        guard(8, "tau continuation", format!("{CLASSICAL_TOL:e} in H1"), || c8_tau(&sh)),
        guard(9, "classical cross-validation", format!("{CLASSICAL_TOL:e} in H1"), || c9_classical(&sh)),
        guard(10, "model-flow conjugacy", "exact", || c10_model(&sh)),
        guard(11, "counterexample", "existence over the scan grid", || c11_counterexample(&sh)),
        guard(12, "orbit equivalence", format!("{RECLOCK_TOL:e} in H1"), || c12_reclock(&sh)),
    ];
    let passed = criteria.iter().all(Criterion::passed);
    Ok(VerifyReport {
        lambda: sh.spec.lambda,
        modes,
        branches: n,
        equilibria: sh.eqs.iter().map(|e| e.label.to_string()).collect(),
        criteria,
        passed,
    })
}

fn c1_counts(sh: &Shared) -> Result<Outcome> {
    let mut measured = BTreeMap::new();
    let mut ok = sh.eqs.len() == 2 * sh.n + 1;
    measured.insert(format!("{}", sh.spec.lambda), sh.eqs.len());
    if sh.cfg.model.f == Nonlinearity::Cubic {
        for (lambda, expected) in [(0.5, 1), (5.0, 5), (10.0, 7)] {
            let count = enumerate_equilibria(&ProblemSpec::default_with_lambda(lambda)?, sh.cfg.modes())?.len();
            ok &= count == expected;
            measured.insert(format!("{lambda}"), count);
        }
    }
    let detail = measured.iter().map(|(l, c)| format!("lambda {l}: {c}")).collect::<Vec<_>>().join(", ");
    Ok(Outcome::check(ok, detail, json!(measured)))
}

fn find<'a>(eqs: &'a [EquilibriumRecord], j: usize, sign: Sign) -> Result<&'a EquilibriumRecord> {
    let label = BranchLabel::branch(j, sign);
    eqs.iter().find(|e| e.label == label).ok_or_else(|| LabError::StructuralInconsistency(format!("{label} missing")))
}

fn c2_symmetry(sh: &Shared) -> Result<Outcome> {
    if sh.n == 0 {
        return Ok(Outcome::not_applicable("no nontrivial equilibria"));
    }
    let mut ok = true;
    let (mut refl, mut pair) = (0.0_f64, 0.0_f64);
    let mut zeros = Vec::new();
    for j in 1..=sh.n {
        let p = find(&sh.eqs, j, Sign::Plus)?;
        let m = find(&sh.eqs, j, Sign::Minus)?;
        ok &= p.interior_zeros == j - 1 && m.interior_zeros == j - 1;
        zeros.push(p.interior_zeros);
        refl = refl.max(p.reflection_defect()).max(m.reflection_defect());
        pair = pair.max(p.profile.axpy(1.0, &m.profile).h1_norm());
    }
    ok &= refl < SYMMETRY_TOL && pair < SYMMETRY_TOL;
    Ok(Outcome::check(
        ok,
        format!("interior zeros {zeros:?}, reflection {refl:.2e}, pair {pair:.2e}"),
        json!({"interior_zeros": zeros, "reflection": refl, "pair": pair}),
    ))
}

fn c3_indices(sh: &Shared) -> Result<Outcome> {
    let fine = 2 * sh.cfg.modes();
    let (fine_eqs, fine_reports) = indexed_equilibria(&sh.spec, fine)?;
    let coarse: Vec<(String, usize)> = sh.reports.iter().map(|r| (r.label.to_string(), r.positive_count)).collect();
    let refined: Vec<(String, usize)> = fine_reports.iter().map(|r| (r.label.to_string(), r.positive_count)).collect();
    let expected = sh.eqs.iter().zip(&sh.reports).all(|(e, r)| r.positive_count == e.label.expected_morse_index(sh.n));
    let gap = sh.reports.iter().chain(&fine_reports).map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let ok = expected && coarse == refined && fine_eqs.len() == sh.eqs.len() && gap > GAP_WITNESS;
    Ok(Outcome::check(
        ok,
        format!("indices {:?}, K = {fine} agrees: {}, smallest |mu| {gap:.3e}", coarse, coarse == refined),
        json!({"indices": coarse, "refined": refined, "gap": gap}),
    ))
}

fn second_singular_value(m: DMatrix<f64>) -> f64 {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.get(1).copied().unwrap_or(0.0)
}

fn c4_rank_one(sh: &Shared) -> Result<Outcome> {
    let modes = sh.cfg.modes();
    let mut eps_max = f64::NEG_INFINITY;
    let mut sigma2 = 0.0_f64;
    for e in &sh.eqs {
        let (eps, b) = spectrum::assemble_rank1(&sh.spec, e, modes)?;
        eps_max = eps_max.max(eps);
        let zero = DMatrix::zeros(modes, modes);
        sigma2 = sigma2.max(second_singular_value(spectrum::full_matrix(&zero, eps, &b)));
    }
    let sign_ok = !sh.spec.a.is_monotone() || eps_max <= 0.0;
    Ok(Outcome::check(
        sign_ok && sigma2 < RANK_TOL,
        format!("max epsilon {eps_max:.3e}, max sigma_2 {sigma2:.2e}"),
        json!({"max_epsilon": eps_max, "max_sigma2": sigma2}),
    ))
}

fn random_initial(modes: usize, rng: &mut ChaCha8Rng) -> crate::sine::Field {
    let norm = rng.random_range(0.5..4.0);
    dynamics::random_field(modes, norm, rng)
}

fn c5_lyapunov(sh: &Shared) -> Result<Outcome> {
    let cfg = sh.cfg.dynamics();
    let mut rng = ChaCha8Rng::seed_from_u64(sh.cfg.search.seed ^ 0x5eed_0005);
    let starts: Vec<_> = (0..RANDOM_TRAJECTORIES).map(|_| random_initial(sh.cfg.modes(), &mut rng)).collect();
    let opts = RunOptions { stop_on_capture: true, ..RunOptions::default() };
    let logs = starts
        .par_iter()
        .map(|u0| dynamics::run_trajectory(&sh.spec, Form::Nonlocal, u0, cfg.t_max, &sh.eqs, &cfg, &opts))
        .collect::<Result<Vec<_>>>()?;
    let mut rise = logs.iter().map(|l| l.max_energy_increase()).fold(f64::NEG_INFINITY, f64::max);
    let mut laps = logs.iter().all(|l| l.laps_non_increasing());
    let captured = logs.iter().filter(|l| matches!(l.terminal, Terminal::Equilibrium { .. })).count();
    for s in &sh.searches {
        rise = rise.max(s.max_energy_increase());
        laps &= s.laps_non_increasing();
    }
    let mut pair = 0.0_f64;
    for j in 1..=sh.n {
        let (p, m) = (find(&sh.eqs, j, Sign::Plus)?, find(&sh.eqs, j, Sign::Minus)?);
        pair = pair.max((p.energy - m.energy).abs() / p.energy.abs().max(f64::MIN_POSITIVE));
    }
    let samples: usize = sh.searches.iter().map(|s| s.samples.len()).sum();
    Ok(Outcome::check(
        rise < ENERGY_STEP_TOL && laps && pair < ENERGY_PAIR_TOL,
        format!(
            "{RANDOM_TRAJECTORIES} random ({captured} captured) and {samples} connection runs: max energy step {rise:.2e}, laps monotone {laps}, energy pair {pair:.2e}"
        ),
        json!({"max_energy_step": rise, "laps_monotone": laps, "energy_pair": pair}),
    ))
}

fn c6_graph(sh: &Shared) -> Result<Outcome> {
    let diff = predicted_graph(sh.n).diff(&sh.graph);
    let violations = sh.graph.violations();
    let unresolved: usize = sh.searches.iter().map(|s| s.unresolved).sum();
    let ok = diff.is_empty() && violations.is_empty() && unresolved == 0;
    let detail = match diff.first() {
        Some(d) => format!("differs from prediction: {d}"),
        None => format!("{} edges as predicted, {unresolved} unresolved", sh.graph.edges.len()),
    };
    Ok(Outcome::check(ok, detail, json!({"graph": sh.graph.to_json(), "unresolved": unresolved, "violations": violations})))
}

fn c7_matrix(sh: &Shared) -> Result<Outcome> {
    let mut ok = true;
    for n in 1..=MATRIX_N_MAX {
        let m = assemble_connection_matrix(n)?;
        ok &= m.squares_to_zero() && m.has_degree_minus_one() && m.is_triangular_in(&predicted_graph(n).transitive_closure());
    }
    let witnessed = if sh.n > 0 {
        let check = morse_check_from(sh.spec.lambda, sh.graph.clone(), 0)?;
        check.consistency.witnessed
    } else {
        true
    };
    Ok(Outcome::check(
        ok && witnessed,
        format!("N = 1..{MATRIX_N_MAX}: square zero, degree -1, triangular {ok}; entries witnessed at N = {}: {witnessed}", sh.n),
        json!({"structure": ok, "witnessed": witnessed}),
    ))
}

fn classical_distance(
    eqs: &[EquilibriumRecord],
    classical: &[crosscheck::ClassicalEquilibrium],
) -> Result<(f64, bool)> {
    let mut dist = 0.0_f64;
    let mut same_index = eqs.len() == classical.len();
    for c in classical {
        let e = eqs
            .iter()
            .find(|e| e.label == c.label)
            .ok_or_else(|| LabError::StructuralInconsistency(format!("{} missing", c.label)))?;
        dist = dist.max(e.profile.h1_distance(&c.profile));
        same_index &= e.morse_index == Some(c.morse_index);
    }
    Ok((dist, same_index))
}

fn c8_tau(sh: &Shared) -> Result<Outcome> {
    if sh.n == 0 {
        return Ok(Outcome::not_applicable("no branch to anchor at"));
    }
    if sh.cfg.model.f != Nonlinearity::Cubic || !sh.spec.a.is_monotone() {
        return Ok(Outcome::not_applicable("needs the cubic reaction and a monotone diffusion"));
    }
    let cont = continue_tau(sh.cfg, TAU_STEPS)?;
    let dims: Vec<_> = cont.rows.iter().map(|r| r.conley_dims()).collect();
    let constant = dims.windows(2).all(|w| w[0] == w[1]);
    let counts_ok = cont.rows.iter().all(|r| r.equilibria.len() == 2 * sh.n + 1);
    let mu = sh.spec.lambda / sh.spec.a.value(cont.anchor_d);
    let classical = crosscheck::classical_equilibria(mu, sh.cfg.modes(), CLASSICAL_STEPS)?;
    let (dist, _) = classical_distance(&cont.rows[0].equilibria, &classical)?;
    Ok(Outcome::check(
        constant && counts_ok && dist < CLASSICAL_TOL,
        format!(
            "{} tau values, {} equilibria each, indices constant {constant}, tau = 0 vs classical {dist:.2e}",
            cont.rows.len(),
            2 * sh.n + 1
        ),
        json!({"constant_indices": constant, "tau0_distance": dist, "anchor_D": cont.anchor_d}),
    ))
}

fn c9_classical(sh: &Shared) -> Result<Outcome> {
    if sh.cfg.model.f != Nonlinearity::Cubic {
        return Ok(Outcome::not_applicable("classical oracle covers the cubic reaction"));
    }
    let spec = sh.spec.with_diffusion(Diffusion::Constant(1.0))?;
    let (eqs, _) = indexed_equilibria(&spec, sh.cfg.modes())?;
    let classical = crosscheck::classical_equilibria(spec.lambda, sh.cfg.modes(), CLASSICAL_STEPS)?;
    let (dist, same_index) = classical_distance(&eqs, &classical)?;
    Ok(Outcome::check(
        dist < CLASSICAL_TOL && same_index,
        format!("{} equilibria, max H1 distance {dist:.2e}, indices agree {same_index}", eqs.len()),
        json!({"distance": dist, "indices_agree": same_index}),
    ))
}

/// `λ` values whose default problems have one and two branches.
pub const MODEL_CHECK_LAMBDAS: [(usize, f64); 2] = [(1, 2.0), (2, 5.0)];

fn c10_model(sh: &Shared) -> Result<Outcome> {
    let mcfg = sh.cfg.modelflow();
    let mut results = BTreeMap::new();
    let mut ok = true;
    let mut first = None;
    let mut check = |n: usize, pde: &ConnectionGraph| -> Result<()> {
        let model = model_connection_graph(n, &mcfg)?;
        let report = conjugacy_graph_check(pde, &model.graph, n)?;
        ok &= report.equal && model.unresolved == 0;
        if first.is_none() {
            first = report.first_offending.clone();
        }
        results.insert(n, report.equal);
        Ok(())
    };
    if sh.n > 0 {
        check(sh.n, &sh.graph)?;
    }
    for (n, lambda) in MODEL_CHECK_LAMBDAS {
        if n == sh.n {
            continue;
        }
        let spec = sh.spec.with_lambda(lambda)?;
        let (eqs, _) = indexed_equilibria(&spec, sh.cfg.modes())?;
        if (eqs.len() - 1) / 2 != n {
            return Err(LabError::StructuralInconsistency(format!("lambda = {lambda} does not give {n} branches")));
        }
        let searches = dynamics::all_connections(&spec, &eqs, &sh.cfg.dynamics())?;
        check(n, &ConnectionGraph::from_searches(n, &searches)?)?;
    }
    let detail = match first {
        Some(f) => format!("graphs differ: {f}"),
        None => format!("equal for n in {:?}", results.keys().collect::<Vec<_>>()),
    };
    Ok(Outcome::check(ok, detail, json!(results)))
}

fn c11_counterexample(sh: &Shared) -> Result<Outcome> {
    if sh.n == 0 {
        return Ok(Outcome::not_applicable("no positive equilibrium to deform"));
    }
    let grid = default_scan_grid(sh.cfg)?;
    let scan = counterexample(sh.cfg, &grid)?;
    let hits = scan.points.iter().filter(|p| p.success).count();
    let most = scan.points.iter().map(|p| p.d.len()).max().unwrap_or(0);
    Ok(Outcome::check(
        scan.passed,
        format!("{hits} of {} grid points give >= 3 positive equilibria with one unstable (max {most})", scan.points.len()),
        json!({"successes": hits, "grid_points": scan.points.len(), "delta0": scan.delta0, "d_star": scan.d_star}),
    ))
}

fn c12_reclock(sh: &Shared) -> Result<Outcome> {
    let cfg = sh.cfg.dynamics();
    let mut rng = ChaCha8Rng::seed_from_u64(sh.cfg.search.seed ^ 0x5eed_0012);
    let starts: Vec<_> = (0..RECLOCK_FIELDS).map(|_| random_initial(sh.cfg.modes(), &mut rng)).collect();
    let dist = starts
        .par_iter()
        .map(|u0| dynamics::reclocking_comparison(&sh.spec, u0, RECLOCK_HORIZON, 20, &cfg).map(|c| c.max_distance()))
        .collect::<Result<Vec<_>>>()?;
    let worst = dist.iter().copied().fold(0.0, f64::max);
    Ok(Outcome::check(
        worst < RECLOCK_TOL,
        format!("{RECLOCK_FIELDS} fields on [0, {RECLOCK_HORIZON}]: max H1 distance {worst:.2e}"),
        json!({"distances": dist}),
    ))
}
