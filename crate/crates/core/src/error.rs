use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("no bracket found while scanning [{lo:e}, {hi:e}]")]
    SearchFailure { lo: f64, hi: f64 },
    #[error("profile does not satisfy its equation (residual {residual:e})")]
    CoefficientMismatch { residual: f64 },
    #[error("mass is independent of the scaling parameter at the mass-critical exponent")]
    MassCriticalDegenerate,
    #[error("no admissible fiber root: {0}")]
    ThresholdExceeded(String),
    #[error("degenerate point: function lies on the zero-class set")]
    DegeneratePoint,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("branch {branch_id} lost near lambda = {nearest_lambda:e}")]
    BranchLost { branch_id: usize, nearest_lambda: f64 },
    #[error("target mass not reachable on branch {branch_id}")]
    NoSolutionOnBranch { branch_id: usize },
    #[error("no normalized solution exists: {0}")]
    Nonexistence(String),
    #[error("energy estimate failed: {0}")]
    EstimateFailed(String),
}

impl NlsError {
    /// Stable machine-readable tag used in JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            NlsError::InvalidArgument(_) => "invalid-argument",
            NlsError::NumericFailure(_) => "numeric-failure",
            NlsError::SearchFailure { .. } => "search-failure",
            NlsError::CoefficientMismatch { .. } => "coefficient-mismatch",
            NlsError::MassCriticalDegenerate => "mass-critical-degenerate",
            NlsError::ThresholdExceeded(_) => "threshold-exceeded",
            NlsError::DegeneratePoint => "degenerate-point",
            NlsError::DomainError(_) => "domain-error",
            NlsError::BranchLost { .. } => "branch-lost",
            NlsError::NoSolutionOnBranch { .. } => "no-solution-on-branch",
            NlsError::Nonexistence(_) => "nonexistence-report",
            NlsError::EstimateFailed(_) => "estimate-failed",
        }
    }
}

pub type Result<T> = std::result::Result<T, NlsError>;
