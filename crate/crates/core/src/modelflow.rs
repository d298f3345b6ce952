//! The model flow on the closed unit ball of `ℝⁿ`,
//!
//! ```text
//! θ' = Qθ − ⟨Qθ, θ⟩θ,   r' = r(1 − r),   Q = diag(1, 1/2, …, 1/n),
//! ```
//!
//! its equilibria, its connection graph by simulation, and the comparison with
//! the PDE graph under the labeling `±e_j ↦ (j−1, ±)`, origin `↦` top.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibria::Sign;
use crate::error::{LabError, Result};
use crate::etd::{self, StepControl, StiffSystem};
use crate::morse::{ConnectionGraph, GraphDiff, MorseLabel};
use crate::numerics::Flow;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelState {
    /// Unit vector; meaningless at the origin.
    pub theta: Vec<f64>,
    pub r: f64,
}

impl ModelState {
    pub fn new(theta: Vec<f64>, r: f64) -> Result<Self> {
        if theta.is_empty() || !(0.0..=1.0).contains(&r) {
            return Err(LabError::InvalidInput(format!("invalid model state (n = {}, r = {r})", theta.len())));
        }
        let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > 0.0 && (norm - 1.0).abs() > 1e-10 {
            return Err(LabError::InvalidInput(format!("|theta| = {norm} is not 1")));
        }
        Ok(ModelState { theta, r })
    }

    pub fn origin(n: usize) -> Self {
        let mut theta = vec![0.0; n];
        theta[0] = 1.0;
        ModelState { theta, r: 0.0 }
    }

    /// The point `r θ` of the ball.
    pub fn point(&self) -> Vec<f64> {
        self.theta.iter().map(|t| self.r * t).collect()
    }

    pub fn distance(&self, other: &ModelState) -> f64 {
        self.point().iter().zip(other.point()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

fn q(n: usize) -> Vec<f64> {
    (1..=n).map(|k| 1.0 / k as f64).collect()
}

/// `⟨Qθ, θ⟩`.
pub fn rayleigh(theta: &[f64]) -> f64 {
    theta.iter().zip(q(theta.len())).map(|(t, qk)| qk * t * t).sum()
}

/// `(θ', r')`; zero velocity at the origin.
pub fn model_rhs(state: &ModelState) -> (Vec<f64>, f64) {
    let n = state.theta.len();
    if state.r == 0.0 {
        return (vec![0.0; n], 0.0);
    }
    let rq = rayleigh(&state.theta);
    let dtheta = state.theta.iter().zip(q(n)).map(|(t, qk)| (qk - rq) * t).collect();
    (dtheta, state.r * (1.0 - state.r))
}

/// The origin and `(±e_j, r = 1)`, labeled.
pub fn model_equilibria(n: usize) -> Result<Vec<(MorseLabel, ModelState)>> {
    if n == 0 {
        return Err(LabError::InvalidInput("model flow needs n >= 1".into()));
    }
    let mut out = vec![(MorseLabel::Top, ModelState::origin(n))];
    for j in 1..=n {
        for sign in [Sign::Minus, Sign::Plus] {
            let mut theta = vec![0.0; n];
            theta[j - 1] = sign.factor();
            out.push((MorseLabel::Level { j: j - 1, sign }, ModelState { theta, r: 1.0 }));
        }
    }
    Ok(out)
}

struct ModelSystem {
    n: usize,
}

impl StiffSystem for ModelSystem {
    fn dim(&self) -> usize {
        self.n + 1
    }

    fn rates(&self, _: &[f64]) -> Vec<f64> {
        vec![0.0; self.n + 1]
    }

    fn remainder(&self, y: &[f64], _: &[f64]) -> Result<Vec<f64>> {
        let state = ModelState { theta: y[..self.n].to_vec(), r: y[self.n] };
        let (mut d, dr) = model_rhs(&state);
        d.push(dr);
        Ok(d)
    }

    fn weight(&self, _: usize) -> f64 {
        1.0
    }

    fn project(&self, y: &mut [f64]) {
        let norm = y[..self.n].iter().map(|v| v * v).sum::<f64>().sqrt();
        y[..self.n].iter_mut().for_each(|v| *v /= norm);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub r_origin: f64,
    pub eta: f64,
    pub capture: f64,
    pub t_max: f64,
    pub tol: f64,
    pub random_samples: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { r_origin: 1e-4, eta: 1e-3, capture: 1e-6, t_max: 300.0, tol: 1e-10, random_samples: 20, seed: 0 }
    }
}

/// One simulated departure.
#[derive(Debug, Clone, Serialize)]
pub struct ModelTrajectory {
    pub source: MorseLabel,
    pub target: Option<MorseLabel>,
    pub max_sphere_drift: f64,
    /// Largest decrease of `⟨Qθ, θ⟩` between accepted steps.
    pub max_rayleigh_drop: f64,
    pub r_monotone: bool,
}

/// Integrates from `start` until it is within `capture` of an equilibrium other than `source`.
pub fn simulate(
    n: usize,
    source: MorseLabel,
    start: ModelState,
    equilibria: &[(MorseLabel, ModelState)],
    cfg: &ModelConfig,
) -> Result<ModelTrajectory> {
    let sys = ModelSystem { n };
    let mut y = start.theta.clone();
    y.push(start.r);
    sys.project(&mut y);
    let ctrl = StepControl { tol: cfg.tol, h_init: 1e-3, h_max: 0.5, ..StepControl::default() };
    let mut target = None;
    let mut drift = 0.0_f64;
    let mut prev_rq = rayleigh(&y[..n]);
    let mut prev_r = start.r;
    let mut rq_drop = 0.0_f64;
    let mut r_monotone = true;
    etd::integrate(&sys, &y, 0.0, cfg.t_max, ctrl, |_, y| {
        let theta = &y[..n];
        drift = drift.max((theta.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs());
        let rq = rayleigh(theta);
        rq_drop = rq_drop.max(prev_rq - rq);
        prev_rq = rq;
        if y[n] < prev_r && prev_r < 1.0 {
            r_monotone = false;
        }
        prev_r = y[n];
        let state = ModelState { theta: theta.to_vec(), r: y[n] };
        for (label, e) in equilibria {
            if *label != source && state.distance(e) < cfg.capture {
                target = Some(*label);
                return Flow::Stop;
            }
        }
        Flow::Continue
    })?;
    Ok(ModelTrajectory { source, target, max_sphere_drift: drift, max_rayleigh_drop: rq_drop, r_monotone })
}

fn unit(n: usize, k: usize, s: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = s;
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelGraphRun {
    pub graph: ConnectionGraph,
    pub trajectories: Vec<ModelTrajectory>,
    pub unresolved: usize,
}

/// Connection graph of the model flow by simulation.
///
/// The origin is left at radius `r_origin` along every `±e_k` and random
/// directions; `±e_j` is left towards `±e_k`, `k < j`, at angle `η`.
pub fn model_connection_graph(n: usize, cfg: &ModelConfig) -> Result<ModelGraphRun> {
    let eqs = model_equilibria(n)?;
    let mut jobs: Vec<(MorseLabel, ModelState)> = Vec::new();
    for k in 0..n {
        for s in [1.0, -1.0] {
            jobs.push((MorseLabel::Top, ModelState { theta: unit(n, k, s), r: cfg.r_origin }));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_samples {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        jobs.push((MorseLabel::Top, ModelState { theta: v.iter().map(|x| x / norm).collect(), r: cfg.r_origin }));
    }
    for j in 1..n {
        for sign in [Sign::Minus, Sign::Plus] {
            for k in 0..j {
                for s in [1.0, -1.0] {
                    let mut theta = unit(n, j, sign.factor());
                    theta[k] = s * cfg.eta;
                    let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
                    theta.iter_mut().for_each(|x| *x /= norm);
                    jobs.push((MorseLabel::Level { j, sign }, ModelState { theta, r: 1.0 }));
                }
            }
        }
    }
    let trajectories: Vec<ModelTrajectory> =
        jobs.into_par_iter().map(|(src, st)| simulate(n, src, st, &eqs, cfg)).collect::<Result<_>>()?;
    let mut graph = ConnectionGraph::new(n);
    for t in &trajectories {
        if let Some(target) = t.target {
            graph.add_edge(t.source, target)?;
        }
    }
    let unresolved = trajectories.iter().filter(|t| t.target.is_none()).count();
    Ok(ModelGraphRun { graph, trajectories, unresolved })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugacyReport {
    pub n: usize,
    pub equal: bool,
    pub diff: GraphDiff,
    pub first_offending: Option<String>,
}

/// Edge-set equality of the PDE and model graphs under the fixed labeling.
pub fn conjugacy_graph_check(pde: &ConnectionGraph, model: &ConnectionGraph, n: usize) -> Result<ConjugacyReport> {
    if pde.n != n || model.n != n {
        return Err(LabError::SizeMismatch(format!("PDE graph N = {}, model graph n = {}, expected {n}", pde.n, model.n)));
    }
    let diff = pde.diff(model);
    Ok(ConjugacyReport { n, equal: diff.is_empty(), first_offending: diff.first(), diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morse::predicted_graph;

    #[test]
    fn rhs_examples() {
        let (d, dr) = model_rhs(&ModelState { theta: vec![1.0, 0.0, 0.0], r: 0.3 });
        assert!(d.iter().all(|v| *v == 0.0));
        assert!((dr - 0.21).abs() < 1e-15);
        assert_eq!(model_rhs(&ModelState { theta: vec![0.0, 1.0], r: 1.0 }).1, 0.0);
        assert_eq!(model_rhs(&ModelState::origin(2)).1, 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (d, _) = model_rhs(&ModelState { theta: vec![h, h], r: 0.5 });
        assert!((d[0] - 0.25 * h).abs() < 1e-15 && (d[1] + 0.25 * h).abs() < 1e-15);
    }

    #[test]
    fn velocity_is_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=5 {
            let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
            let theta: Vec<f64> = v.iter().map(|x| x / norm).collect();
            let (d, _) = model_rhs(&ModelState { theta: theta.clone(), r: 0.5 });
            let dot: f64 = d.iter().zip(&theta).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-12);
        }
    }

    // Forward difference of a normalized Euler step of the unconstrained
    // linear flow θ' = Qθ reproduces the projected vector field.
    #[test]
    fn projected_linear_flow_oracle() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let theta = [h, h];
        let dt = 1e-7;
        let moved = [theta[0] * (1.0 + dt), theta[1] * (1.0 + 0.5 * dt)];
        let norm = (moved[0] * moved[0] + moved[1] * moved[1]).sqrt();
        let fd = [(moved[0] / norm - theta[0]) / dt, (moved[1] / norm - theta[1]) / dt];
        let (d, _) = model_rhs(&ModelState { theta: theta.to_vec(), r: 1.0 });
        assert!((fd[0] - d[0]).abs() < 1e-6 && (fd[1] - d[1]).abs() < 1e-6);
    }

    #[test]
    fn equilibria_are_stationary() {
        for n in 1..=4 {
            let eqs = model_equilibria(n).unwrap();
            assert_eq!(eqs.len(), 2 * n + 1);
            for (_, e) in &eqs {
                let (d, dr) = model_rhs(e);
                assert!(d.iter().all(|v| v.abs() < 1e-12) && dr.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_stays_unit_and_rayleigh_rises() {
        let eqs = model_equilibria(3).unwrap();
        let start = ModelState { theta: vec![0.2, 0.5, (1.0f64 - 0.29).sqrt()], r: 0.01 };
        let cfg = ModelConfig { t_max: 100.0, capture: 0.0, ..ModelConfig::default() };
        let t = simulate(3, MorseLabel::Top, start, &eqs, &cfg).unwrap();
        assert!(t.max_sphere_drift < 1e-10);
        assert!(t.max_rayleigh_drop <= 1e-14);
        assert!(t.r_monotone);
    }

    #[test]
    fn graphs_match_prediction() {
        for n in 1..=4 {
            let run = model_connection_graph(n, &ModelConfig::default()).unwrap();
            assert_eq!(run.unresolved, 0, "n = {n}");
            assert_eq!(run.graph, predicted_graph(n), "n = {n}");
            assert!(run.trajectories.iter().all(|t| t.max_rayleigh_drop <= 1e-12));
        }
    }

    #[test]
    fn conjugacy_check_semantics() {
        let p3 = predicted_graph(3);
        assert!(conjugacy_graph_check(&p3, &p3, 3).unwrap().equal);
        assert!(matches!(conjugacy_graph_check(&p3, &predicted_graph(2), 3), Err(LabError::SizeMismatch(_))));
        // exchange levels 0 and 1
        let swap = |l: MorseLabel| match l {
            MorseLabel::Level { j: 1, sign } => MorseLabel::Level { j: 0, sign },
            MorseLabel::Level { j: 0, sign } => MorseLabel::Level { j: 1, sign },
            other => other,
        };
        let mut shuffled = ConnectionGraph::new(3);
        for &(s, t) in &p3.edges {
            shuffled.edges.insert((swap(s), swap(t)));
        }
        let r = conjugacy_graph_check(&p3, &shuffled, 3).unwrap();
        assert!(!r.equal);
        assert!(r.first_offending.is_some());
    }
}
