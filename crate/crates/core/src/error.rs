use thiserror::Error;

/// Errors raised by the laboratory.
///
/// Variants fall into two families: invalid or degenerate input (exit code 2
/// at the command line) and numerical failure (exit code 3).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resolution error: {points} grid points cannot resolve {modes} modes")]
    Resolution { points: usize, modes: usize },

    #[error("degenerate field: all samples below {threshold:e} in magnitude")]
    DegenerateField { threshold: f64 },

    #[error("branch j = {j} not born at effective parameter {lambda_eff} (needs > {threshold})")]
    BranchNotBorn { j: usize, lambda_eff: f64, threshold: f64 },

    #[error("degenerate parameter: lambda = {lambda} lies within {tol:e} of bifurcation value a(0)*{k}^2")]
    DegenerateParameter { lambda: f64, k: usize, tol: f64 },

    #[error("fixed point not found for branch {j}: no sign change of beta(D) - D on [{lo:e}, {hi:e}]")]
    FixedPointNotFound { j: usize, lo: f64, hi: f64 },

    #[error("continuation breakdown at tau = {tau}: {found} equilibria, expected {expected}")]
    ContinuationBreakdown { tau: f64, found: usize, expected: usize },

    #[error("construction error: {0}")]
    Construction(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate equilibrium {label}: spectral gap {gap:e} not above {tol:e}")]
    NonHyperbolic { label: String, gap: f64, tol: f64 },

    #[error("structural inconsistency: {0}")]
    StructuralInconsistency(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("blow-up: non-finite state at t = {t}")]
    BlowUp { t: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),
}

impl LabError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Numerical(_) | LabError::BlowUp { .. } | LabError::FixedPointNotFound { .. } => 3,
            LabError::ContinuationBreakdown { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
