//! TOML run configuration.
//!
//! ```toml
//! [model]
//! lambda = 10.0
//! f = "cubic"
//! a = "default"            # "constant" | "default" | "counterexample"
//! a_params = { value = 1.0 }
//!
//! [discretization]
//! K = 64
//!
//! [search]
//! samples = 20
//! seed = 0
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicsConfig;
use crate::equilibria::counterexample::build_counterexample_a;
use crate::error::{LabError, Result};
use crate::model::{Diffusion, Nonlinearity, ProblemSpec};
use crate::modelflow::ModelConfig;
use crate::sine::dealiased_points;
use crate::spectrum::TOL_HYP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionKind {
    Constant,
    Default,
    Counterexample,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionParams {
    /// Value of the constant diffusion.
    pub value: Option<f64>,
    /// Width `δ` of the counterexample pieces.
    pub delta: Option<f64>,
    /// Slope `J` of the falling piece.
    #[serde(rename = "J")]
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub lambda: f64,
    #[serde(default = "cubic")]
    pub f: Nonlinearity,
    #[serde(default = "default_kind")]
    pub a: DiffusionKind,
    #[serde(default)]
    pub a_params: DiffusionParams,
}

fn cubic() -> Nonlinearity {
    Nonlinearity::Cubic
}

fn default_kind() -> DiffusionKind {
    DiffusionKind::Default
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    #[serde(rename = "K")]
    pub modes: usize,
    /// Collocation points for nonlinear terms; defaults to `2K`.
    #[serde(rename = "P", default)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub hyperbolicity: f64,
    pub step: f64,
    pub capture: f64,
    pub dwell: f64,
    pub t_max: f64,
    pub departure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let d = DynamicsConfig::default();
        Tolerances {
            hyperbolicity: TOL_HYP,
            step: d.tol,
            capture: d.r_capture,
            dwell: d.dwell,
            t_max: d.t_max,
            departure: d.delta_dep,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Search {
    pub samples: usize,
    pub seed: u64,
    pub circle_samples: usize,
    pub bisection_depth: usize,
}

impl Default for Search {
    fn default() -> Self {
        let d = DynamicsConfig::default();
        Search { samples: d.random_samples, seed: d.seed, circle_samples: d.circle_samples, bisection_depth: d.bisection_depth }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: PathBuf,
}

impl Default for Output {
    fn default() -> Self {
        Output { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default = "default_discretization")]
    pub discretization: Discretization,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub search: Search,
    #[serde(default)]
    pub output: Output,
}

fn default_discretization() -> Discretization {
    Discretization { modes: 64, points: None }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelSection {
                lambda: 10.0,
                f: Nonlinearity::Cubic,
                a: DiffusionKind::Default,
                a_params: DiffusionParams::default(),
            },
            discretization: default_discretization(),
            tolerances: Tolerances::default(),
            search: Search::default(),
            output: Output::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn modes(&self) -> usize {
        self.discretization.modes
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.model.lambda.is_finite() && self.model.lambda > 0.0) {
            return Err(LabError::Config(format!("lambda must be positive, got {}", self.model.lambda)));
        }
        let k = self.discretization.modes;
        if k < 8 {
            return Err(LabError::Config(format!("K must be at least 8, got {k}")));
        }
        if let Some(p) = self.discretization.points {
            if p < dealiased_points(k) {
                return Err(LabError::Resolution { points: p, modes: k });
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("hyperbolicity", t.hyperbolicity),
            ("step", t.step),
            ("capture", t.capture),
            ("dwell", t.dwell),
            ("t_max", t.t_max),
            ("departure", t.departure),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(LabError::Config(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// The problem described by `[model]`.
    pub fn spec(&self) -> Result<ProblemSpec> {
        let m = &self.model;
        let base = ProblemSpec::new(m.lambda, m.f, Diffusion::Saturating)?;
        match m.a {
            DiffusionKind::Default => Ok(base),
            DiffusionKind::Constant => base.with_diffusion(Diffusion::Constant(m.a_params.value.unwrap_or(1.0))),
            DiffusionKind::Counterexample => {
                let (Some(delta), Some(slope)) = (m.a_params.delta, m.a_params.slope) else {
                    return Err(LabError::Config("counterexample diffusion needs a_params.delta and a_params.J".into()));
                };
                let c = build_counterexample_a(&base, delta, slope, self.modes())?;
                base.with_diffusion(Diffusion::Counterexample(Arc::new(c)))
            }
        }
    }

    pub fn dynamics(&self) -> DynamicsConfig {
        let t = &self.tolerances;
        let s = &self.search;
        DynamicsConfig {
            tol: t.step,
            r_capture: t.capture,
            dwell: t.dwell,
            t_max: t.t_max,
            delta_dep: t.departure,
            random_samples: s.samples,
            circle_samples: s.circle_samples,
            bisection_depth: s.bisection_depth,
            seed: s.seed,
            ..DynamicsConfig::default()
        }
    }

    pub fn modelflow(&self) -> ModelConfig {
        ModelConfig { random_samples: self.search.samples, seed: self.search.seed, ..ModelConfig::default() }
    }
}
