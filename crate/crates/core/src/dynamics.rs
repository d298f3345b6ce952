//! Time integration of the semilinear and nonlocal forms, ω-limit
//! classification and the search for connecting orbits.
//!
//! Both forms are advanced with ETDRK4 in sine space. For the nonlocal form
//! the diffusion coefficient is frozen at `a(D(u_n))` for the linear part of
//! each step and the difference `(a(D(u)) − a(D(u_n))) u_xx` is carried in the
//! explicit remainder, so no approximation beyond the scheme itself is made.
//!
//! Connection search departs from a source equilibrium along its unstable
//! eigenvectors (axes, random combinations, a great circle in the leading
//! unstable plane) and, from zero, along `sin jx` inside the invariant
//! subspace of `π/j`-antiperiodic fields. Pairs of neighbouring circle
//! departures with different limits are bisected; the boundary between two
//! basins flows to the saddle separating them.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibria::{BranchLabel, EquilibriumRecord};
use crate::error::{LabError, Result};
use crate::etd::{self, StepControl, StiffSystem};
use crate::model::{self, ProblemSpec};
use crate::numerics::Flow;
use crate::sine::{self, Field};
use crate::spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Semilinear,
    Nonlocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct DynamicsConfig {
    pub tol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub r_capture: f64,
    pub dwell: f64,
    pub t_max: f64,
    pub delta_dep: f64,
    pub random_samples: usize,
    pub circle_samples: usize,
    pub bisection_depth: usize,
    pub seed: u64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            tol: 1e-8,
            h_init: 1e-3,
            h_max: 0.25,
            r_capture: 1e-3,
            dwell: 1.0,
            t_max: 200.0,
            delta_dep: 1e-4,
            random_samples: 20,
            circle_samples: 12,
            bisection_depth: 48,
            seed: 0,
        }
    }
}

impl DynamicsConfig {
    pub fn step_control(&self) -> StepControl {
        StepControl { tol: self.tol, h_init: self.h_init, h_max: self.h_max, ..StepControl::default() }
    }
}

/// One of the two PDE forms as an ETD system, optionally with the clock
/// `α' = a(‖u_x‖²)` appended and optionally restricted to the modes `k ≡ 0 mod m`.
pub struct PdeSystem<'a> {
    pub spec: &'a ProblemSpec,
    pub form: Form,
    pub modes: usize,
    pub clock: bool,
    pub restrict: Option<usize>,
}

impl<'a> PdeSystem<'a> {
    pub fn new(spec: &'a ProblemSpec, form: Form, modes: usize) -> Self {
        PdeSystem { spec, form, modes, clock: false, restrict: None }
    }

    fn field(&self, y: &[f64]) -> Result<Field> {
        Field::from_coeffs(y[..self.modes].to_vec()).map_err(|_| LabError::BlowUp { t: f64::NAN })
    }
}

impl StiffSystem for PdeSystem<'_> {
    fn dim(&self) -> usize {
        self.modes + usize::from(self.clock)
    }

    fn rates(&self, y: &[f64]) -> Vec<f64> {
        let scale = match self.form {
            Form::Semilinear => 1.0,
            Form::Nonlocal => self.spec.a.value(sine::h1_seminorm_sq(&Field::from_raw(y[..self.modes].to_vec()))),
        };
        let mut c: Vec<f64> = (1..=self.modes).map(|k| -scale * (k * k) as f64).collect();
        if self.clock {
            c.push(0.0);
        }
        c
    }

    fn remainder(&self, y: &[f64], rates: &[f64]) -> Result<Vec<f64>> {
        let u = self.field(y)?;
        let d = sine::h1_seminorm_sq(&u);
        let a = self.spec.a.value(d);
        let f = self.spec.f;
        let reaction = sine::galerkin_map(&u, |s| f.value(s));
        let mut out: Vec<f64> = match self.form {
            Form::Semilinear => {
                let s = self.spec.lambda / a;
                reaction.coeffs().iter().map(|r| s * r).collect()
            }
            Form::Nonlocal => {
                let frozen = -rates[0];
                reaction
                    .coeffs()
                    .iter()
                    .zip(u.coeffs())
                    .enumerate()
                    .map(|(i, (r, c))| {
                        let k2 = ((i + 1) * (i + 1)) as f64;
                        (a - frozen) * (-k2 * c) + self.spec.lambda * r
                    })
                    .collect()
            }
        };
        if self.clock {
            out.push(a);
        }
        Ok(out)
    }

    fn weight(&self, i: usize) -> f64 {
        if i < self.modes {
            PI / 2.0 * ((i + 1) * (i + 1)) as f64
        } else {
            1.0
        }
    }

    fn project(&self, y: &mut [f64]) {
        if let Some(m) = self.restrict {
            for (i, c) in y[..self.modes].iter_mut().enumerate() {
                if (i + 1) % m != 0 {
                    *c = 0.0;
                }
            }
        }
    }
}

/// Advances the state by `dt` with adaptive ETDRK4.
pub fn evolve(spec: &ProblemSpec, form: Form, u: &Field, dt: f64, cfg: &DynamicsConfig) -> Result<Field> {
    if !(dt > 0.0) {
        return Err(LabError::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let sys = PdeSystem::new(spec, form, u.modes());
    let run = etd::integrate(&sys, u.coeffs(), 0.0, dt, cfg.step_control(), |_, _| Flow::Continue)?;
    Field::from_coeffs(run.y)
}

/// `u_t = u_xx + λ f(u) / a(‖u_x‖²)` over `[0, dt]`.
pub fn step_semilinear(spec: &ProblemSpec, u: &Field, dt: f64) -> Result<Field> {
    evolve(spec, Form::Semilinear, u, dt, &DynamicsConfig::default())
}

/// `u_t = a(‖u_x‖²) u_xx + λ f(u)` over `[0, dt]`.
pub fn step_nonlocal(spec: &ProblemSpec, u: &Field, dt: f64) -> Result<Field> {
    evolve(spec, Form::Nonlocal, u, dt, &DynamicsConfig::default())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    Equilibrium { label: BranchLabel },
    Unresolved,
    Running,
}

/// Monitors along one trajectory, one entry per accepted step.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryLog {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    pub laps: Vec<usize>,
    /// Nearest equilibrium and its `H¹` distance, if equilibria were given.
    pub nearest: Vec<Option<(BranchLabel, f64)>>,
    /// Empty unless fields were requested.
    #[serde(skip)]
    pub fields: Vec<Field>,
    pub terminal: Terminal,
}

impl TrajectoryLog {
    fn new() -> Self {
        TrajectoryLog {
            times: Vec::new(),
            energies: Vec::new(),
            laps: Vec::new(),
            nearest: Vec::new(),
            fields: Vec::new(),
            terminal: Terminal::Running,
        }
    }

    /// Largest increase `E(t_{k+1}) − E(t_k)`; non-positive for a descending energy.
    pub fn max_energy_increase(&self) -> f64 {
        self.energies.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn laps_non_increasing(&self) -> bool {
        self.laps.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn final_field(&self) -> Option<&Field> {
        self.fields.last()
    }

    /// `t,energy,lap,distance` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,energy,lap,distance\n");
        for i in 0..self.times.len() {
            let dist = self.nearest[i].map(|(_, d)| d.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{}\n", self.times[i], self.energies[i], self.laps[i], dist));
        }
        s
    }
}

/// Options for [`run_trajectory`].
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub keep_fields: bool,
    /// Never capture at this label until the trajectory has left its ball.
    pub exclude: Option<BranchLabel>,
    pub restrict: Option<usize>,
    /// Stop at capture; otherwise run to `t_end`.
    pub stop_on_capture: bool,
}

fn nearest(u: &Field, equilibria: &[EquilibriumRecord]) -> Option<(BranchLabel, f64)> {
    equilibria
        .iter()
        .map(|e| (e.label, u.h1_distance(&e.profile)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

fn lap_or_zero(u: &Field) -> usize {
    sine::lap_number(u, sine::lap_points(u.modes())).unwrap_or(0)
}

/// Integrates `form` from `u0` up to `t_end` with monitors and capture detection.
pub fn run_trajectory(
    spec: &ProblemSpec,
    form: Form,
    u0: &Field,
    t_end: f64,
    equilibria: &[EquilibriumRecord],
    cfg: &DynamicsConfig,
    opts: &RunOptions,
) -> Result<TrajectoryLog> {
    let modes = u0.modes();
    let eqs: Vec<EquilibriumRecord> = equilibria
        .iter()
        .map(|e| EquilibriumRecord { profile: e.profile.resized(modes), ..e.clone() })
        .collect();
    let sys = PdeSystem { spec, form, modes, clock: false, restrict: opts.restrict };
    let mut y0 = u0.coeffs().to_vec();
    sys.project(&mut y0);
    let mut log = TrajectoryLog::new();
    let record = |t: f64, u: &Field, log: &mut TrajectoryLog| -> Result<Option<(BranchLabel, f64)>> {
        let near = nearest(u, &eqs);
        log.times.push(t);
        log.energies.push(model::energy(spec, u)?.value);
        log.laps.push(lap_or_zero(u));
        log.nearest.push(near);
        if opts.keep_fields {
            log.fields.push(u.clone());
        }
        Ok(near)
    };
    let start = Field::from_coeffs(y0.clone())?;
    record(0.0, &start, &mut log)?;
    let mut left_source = opts.exclude.is_none();
    let mut candidate: Option<(BranchLabel, f64)> = None;
    let mut captured = None;
    let mut failure = None;
    let r = cfg.r_capture;
    let run = etd::integrate(&sys, &y0, 0.0, t_end, cfg.step_control(), |t, y| {
        let u = Field::from_raw(y.to_vec());
        let near = match record(t, &u, &mut log) {
            Ok(n) => n,
            Err(e) => {
                failure = Some(e);
                return Flow::Stop;
            }
        };
        if eqs.is_empty() {
            return Flow::Continue;
        }
        if !left_source {
            let src = opts.exclude.expect("exclusion label");
            let d = eqs.iter().find(|e| e.label == src).map(|e| u.h1_distance(&e.profile)).unwrap_or(f64::INFINITY);
            if d > 2.0 * r {
                left_source = true;
            }
        }
        let usable = |label: BranchLabel| left_source || Some(label) != opts.exclude;
        if let Some((label, t_in)) = candidate {
            let d = eqs.iter().find(|e| e.label == label).map(|e| u.h1_distance(&e.profile)).unwrap_or(f64::INFINITY);
            if d <= 2.0 * r && usable(label) {
                if t - t_in >= cfg.dwell {
                    captured = Some(label);
                    if opts.stop_on_capture {
                        return Flow::Stop;
                    }
                }
                return Flow::Continue;
            }
            candidate = None;
        }
        if let Some((label, d)) = near {
            if d < r && usable(label) {
                candidate = Some((label, t));
            }
        }
        Flow::Continue
    });
    if let Some(e) = failure {
        return Err(e);
    }
    run?;
    log.terminal = match captured {
        Some(label) => Terminal::Equilibrium { label },
        None if eqs.is_empty() => Terminal::Running,
        None => Terminal::Unresolved,
    };
    Ok(log)
}

/// Limit of the semilinear flow from `u0` among `equilibria`, or `None` after `t_max`.
pub fn classify_omega_limit(
    spec: &ProblemSpec,
    u0: &Field,
    equilibria: &[EquilibriumRecord],
    cfg: &DynamicsConfig,
) -> Result<Option<BranchLabel>> {
    let log = run_trajectory(
        spec,
        Form::Semilinear,
        u0,
        cfg.t_max,
        equilibria,
        cfg,
        &RunOptions { stop_on_capture: true, ..RunOptions::default() },
    )?;
    Ok(match log.terminal {
        Terminal::Equilibrium { label } => Some(label),
        _ => None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Departure {
    Axis { index: usize, sign: i8 },
    Random { index: usize },
    Circle { index: usize },
    Symmetric { mode: usize, sign: i8 },
    Bisection { pair: usize, depth: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleOutcome {
    pub departure: Departure,
    pub target: Option<BranchLabel>,
    pub capture_time: Option<f64>,
    pub max_energy_increase: f64,
    pub laps_non_increasing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectionSearch {
    pub source: BranchLabel,
    pub unstable_dim: usize,
    pub targets: BTreeSet<BranchLabel>,
    pub samples: Vec<SampleOutcome>,
    pub unresolved: usize,
}

impl ConnectionSearch {
    pub fn max_energy_increase(&self) -> f64 {
        self.samples.iter().map(|s| s.max_energy_increase).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn laps_non_increasing(&self) -> bool {
        self.samples.iter().all(|s| s.laps_non_increasing)
    }
}

struct Search<'a> {
    spec: &'a ProblemSpec,
    source: &'a EquilibriumRecord,
    equilibria: &'a [EquilibriumRecord],
    cfg: &'a DynamicsConfig,
}

impl Search<'_> {
    fn run(&self, departure: Departure, offset: &Field, restrict: Option<usize>) -> Result<SampleOutcome> {
        let u0 = self.source.profile.axpy(1.0, offset);
        let opts = RunOptions { keep_fields: false, exclude: Some(self.source.label), restrict, stop_on_capture: true };
        let log = run_trajectory(self.spec, Form::Semilinear, &u0, self.cfg.t_max, self.equilibria, self.cfg, &opts)?;
        let target = match log.terminal {
            Terminal::Equilibrium { label } => Some(label),
            _ => None,
        };
        Ok(SampleOutcome {
            departure,
            target,
            capture_time: target.map(|_| *log.times.last().expect("non-empty log")),
            max_energy_increase: log.max_energy_increase(),
            laps_non_increasing: log.laps_non_increasing(),
        })
    }
}

fn scaled(v: &Field, norm: f64) -> Field {
    v * (norm / v.h1_norm())
}

/// Samples the unstable manifold of `source` and classifies where each departure ends.
pub fn find_connections(
    spec: &ProblemSpec,
    source: &EquilibriumRecord,
    equilibria: &[EquilibriumRecord],
    cfg: &DynamicsConfig,
) -> Result<ConnectionSearch> {
    let modes = source.profile.modes();
    let dirs: Vec<Field> = spectrum::unstable_directions(spec, source, modes)?.into_iter().map(|(_, v)| v).collect();
    let d = dirs.len();
    if d == 0 {
        return Err(LabError::Precondition(format!("{} has no unstable directions", source.label)));
    }
    let delta = cfg.delta_dep;
    let mut jobs: Vec<(Departure, Field, Option<usize>)> = Vec::new();
    for (i, v) in dirs.iter().enumerate() {
        for sign in [1i8, -1] {
            jobs.push((Departure::Axis { index: i, sign }, scaled(v, delta * sign as f64), None));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (source.label.index() as u64) << 8);
    for index in 0..cfg.random_samples {
        let mut v = Field::zeros(modes);
        for e in &dirs {
            let w: f64 = StandardNormal.sample(&mut rng);
            v = v.axpy(w / e.h1_norm(), e);
        }
        jobs.push((Departure::Random { index }, scaled(&v, delta), None));
    }
    let circle: Vec<f64> = (0..cfg.circle_samples).map(|i| 2.0 * PI * i as f64 / cfg.circle_samples as f64).collect();
    let plane = |theta: f64| -> Field {
        let (e1, e2) = (scaled(&dirs[0], 1.0), scaled(&dirs[1], 1.0));
        scaled(&(&(&e1 * theta.cos()) + &(&e2 * theta.sin())), delta)
    };
    let circle_start = jobs.len();
    if d >= 2 {
        for (index, &theta) in circle.iter().enumerate() {
            jobs.push((Departure::Circle { index }, plane(theta), None));
        }
    }
    if source.label == BranchLabel::Zero {
        for mode in 2..=d {
            for sign in [1i8, -1] {
                let v = Field::sine_mode(modes, mode, 1.0);
                jobs.push((Departure::Symmetric { mode, sign }, scaled(&v, delta * sign as f64), Some(mode)));
            }
        }
    }
    let search = Search { spec, source, equilibria, cfg };
    let mut samples: Vec<SampleOutcome> =
        jobs.par_iter().map(|(dep, v, restrict)| search.run(dep.clone(), v, *restrict)).collect::<Result<_>>()?;

    if d >= 2 && cfg.circle_samples >= 2 {
        let m = circle.len();
        let pairs: Vec<(usize, f64, f64, BranchLabel, BranchLabel)> = (0..m)
            .filter_map(|i| {
                let (a, b) = (&samples[circle_start + i], &samples[circle_start + (i + 1) % m]);
                match (a.target, b.target) {
                    (Some(ta), Some(tb)) if ta != tb => {
                        let hi = if i + 1 == m { 2.0 * PI } else { circle[i + 1] };
                        Some((i, circle[i], hi, ta, tb))
                    }
                    _ => None,
                }
            })
            .collect();
        let found: Vec<Vec<SampleOutcome>> = pairs
            .par_iter()
            .map(|&(pair, lo, hi, tl, tr)| -> Result<Vec<SampleOutcome>> {
                let (mut lo, mut hi) = (lo, hi);
                let mut out = Vec::new();
                for depth in 0..cfg.bisection_depth {
                    let mid = 0.5 * (lo + hi);
                    let s = search.run(Departure::Bisection { pair, depth }, &plane(mid), None)?;
                    let t = s.target;
                    out.push(s);
                    match t {
                        Some(t) if t == tl => lo = mid,
                        Some(t) if t == tr => hi = mid,
                        _ => break,
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        samples.extend(found.into_iter().flatten());
    }

    let targets: BTreeSet<BranchLabel> = samples.iter().filter_map(|s| s.target).collect();
    let unresolved = samples.iter().filter(|s| s.target.is_none()).count();
    Ok(ConnectionSearch { source: source.label, unstable_dim: d, targets, samples, unresolved })
}

/// Connection searches from every equilibrium with unstable directions.
pub fn all_connections(
    spec: &ProblemSpec,
    equilibria: &[EquilibriumRecord],
    cfg: &DynamicsConfig,
) -> Result<Vec<ConnectionSearch>> {
    let mut out = Vec::new();
    for e in equilibria {
        let index = match e.morse_index {
            Some(i) => i,
            None => spectrum::analyze(spec, e, e.profile.modes())?.positive_count,
        };
        if index > 0 {
            out.push(find_connections(spec, e, equilibria, cfg)?);
        }
    }
    Ok(out)
}

/// Nonlocal and reclocked semilinear states at matched times.
#[derive(Debug, Clone, Serialize)]
pub struct ReclockComparison {
    pub times: Vec<f64>,
    /// `α(t) = ∫₀ᵗ a(‖u_x‖²)`.
    pub clock: Vec<f64>,
    pub distances: Vec<f64>,
}

impl ReclockComparison {
    pub fn max_distance(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

/// Integrates the nonlocal form with its clock, then the semilinear form to the
/// matching clock values, and compares the states.
pub fn reclocking_comparison(
    spec: &ProblemSpec,
    u0: &Field,
    t_end: f64,
    samples: usize,
    cfg: &DynamicsConfig,
) -> Result<ReclockComparison> {
    let modes = u0.modes();
    let nonlocal = PdeSystem { spec, form: Form::Nonlocal, modes, clock: true, restrict: None };
    let semilinear = PdeSystem::new(spec, Form::Semilinear, modes);
    let ctrl = cfg.step_control();
    let mut y = u0.coeffs().to_vec();
    y.push(0.0);
    let mut v = u0.coeffs().to_vec();
    let (mut t, mut s) = (0.0, 0.0);
    let mut out = ReclockComparison { times: Vec::new(), clock: Vec::new(), distances: Vec::new() };
    for i in 1..=samples {
        let t_next = t_end * i as f64 / samples as f64;
        y = etd::integrate(&nonlocal, &y, t, t_next, ctrl, |_, _| Flow::Continue)?.y;
        t = t_next;
        let alpha = y[modes];
        v = etd::integrate(&semilinear, &v, s, alpha, ctrl, |_, _| Flow::Continue)?.y;
        s = alpha;
        let a = Field::from_coeffs(y[..modes].to_vec())?;
        let b = Field::from_coeffs(v.clone())?;
        out.times.push(t);
        out.clock.push(alpha);
        out.distances.push(a.h1_distance(&b));
    }
    Ok(out)
}

/// A random field with `N(0, 1)/k²` coefficients scaled to `H¹` norm `norm`.
pub fn random_field(modes: usize, norm: f64, rng: &mut impl rand::Rng) -> Field {
    let coeffs: Vec<f64> = (1..=modes)
        .map(|k| {
            let z: f64 = StandardNormal.sample(rng);
            z / (k * k) as f64
        })
        .collect();
    scaled(&Field::from_raw(coeffs), norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{enumerate_equilibria, solve_nonlocal_equilibrium, Sign};
    use crate::model::{Diffusion, Nonlinearity};
    use crate::spectrum::fill_morse_indices;

    const K: usize = 32;

    #[test]
    fn zero_stays_zero() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let u = step_semilinear(&spec, &Field::zeros(K), 1.0).unwrap();
        assert!(u.coeffs().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn pure_heat_decay() {
        let spec = ProblemSpec::new(1e-300, Nonlinearity::Linear, Diffusion::Constant(1.0)).unwrap();
        let u = step_semilinear(&spec, &Field::sine_mode(K, 1, 1.0), 1.0).unwrap();
        assert!((u.coeffs()[0] - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn equilibria_do_not_drift() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let phi = solve_nonlocal_equilibrium(&spec, 1, Sign::Plus, K).unwrap();
        for step in [step_semilinear, step_nonlocal] {
            let u = step(&spec, &phi.profile, 10.0).unwrap();
            assert!(u.h1_distance(&phi.profile) < 1e-8, "{}", u.h1_distance(&phi.profile));
        }
    }

    #[test]
    fn constant_diffusion_forms_coincide() {
        let spec = ProblemSpec::new(10.0, Nonlinearity::Cubic, Diffusion::Constant(1.0)).unwrap();
        let u0 = Field::sine_mode(K, 1, 0.3).axpy(1.0, &Field::sine_mode(K, 3, 0.2));
        let a = step_semilinear(&spec, &u0, 1.0).unwrap();
        let b = step_nonlocal(&spec, &u0, 1.0).unwrap();
        assert!(a.h1_distance(&b) < 1e-12);
    }

    #[test]
    fn omega_limits_of_small_humps() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let eqs = enumerate_equilibria(&spec, K).unwrap();
        let cfg = DynamicsConfig::default();
        let up = classify_omega_limit(&spec, &Field::sine_mode(K, 1, 0.01), &eqs, &cfg).unwrap();
        let down = classify_omega_limit(&spec, &Field::sine_mode(K, 1, -0.01), &eqs, &cfg).unwrap();
        assert_eq!(up, Some(BranchLabel::branch(1, Sign::Plus)));
        assert_eq!(down, Some(BranchLabel::branch(1, Sign::Minus)));
    }

    #[test]
    fn flow_is_odd() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u0 = random_field(K, 1.0, &mut rng);
        let a = step_semilinear(&spec, &u0, 2.0).unwrap();
        let b = step_semilinear(&spec, &-&u0, 2.0).unwrap();
        assert!(a.h1_distance(&-&b) < 1e-12);
    }

    #[test]
    fn reclocked_forms_agree() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u0 = random_field(K, 2.0, &mut rng);
        let cmp = reclocking_comparison(&spec, &u0, 2.0, 20, &DynamicsConfig::default()).unwrap();
        assert!(cmp.max_distance() < 1e-5, "{}", cmp.max_distance());
        assert!(cmp.clock.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn stable_source_is_refused() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let eqs = enumerate_equilibria(&spec, K).unwrap();
        let phi = eqs.iter().find(|e| e.label == BranchLabel::branch(1, Sign::Plus)).unwrap();
        let r = find_connections(&spec, phi, &eqs, &DynamicsConfig::default());
        assert!(matches!(r, Err(LabError::Precondition(_))));
    }

    #[test]
    fn connections_from_phi2() {
        let spec = ProblemSpec::default_with_lambda(10.0).unwrap();
        let mut eqs = enumerate_equilibria(&spec, K).unwrap();
        fill_morse_indices(&spec, &mut eqs, K).unwrap();
        let src = eqs.iter().find(|e| e.label == BranchLabel::branch(2, Sign::Plus)).unwrap().clone();
        let cfg = DynamicsConfig { random_samples: 4, ..DynamicsConfig::default() };
        let search = find_connections(&spec, &src, &eqs, &cfg).unwrap();
        let want: BTreeSet<_> = [BranchLabel::branch(1, Sign::Plus), BranchLabel::branch(1, Sign::Minus)].into();
        assert_eq!(search.targets, want);
        assert_eq!(search.unresolved, 0);
        assert!(search.max_energy_increase() < 1e-8);
        assert!(search.laps_non_increasing());
    }
}
