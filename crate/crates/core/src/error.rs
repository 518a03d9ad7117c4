use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("frequency grid cannot resolve the request: {0}")]
    Resolution(String),

    #[error("delay {tau:e} s exceeds the grid's Nyquist limit {limit:e} s")]
    Aliasing { tau: f64, limit: f64 },

    #[error("jitter convolution leaks {leaked:.3e} of the curve's integral past the axis; pad the axis")]
    BoundaryLeakage { leaked: f64 },

    #[error("normalization failed: {0}")]
    Normalization(String),

    #[error("visibility undefined: {0}")]
    UndefinedVisibility(String),

    #[error("fit did not converge after {iterations} iterations (chi2/dof {reduced_chi2:.4})")]
    NoConvergence {
        iterations: usize,
        reduced_chi2: f64,
        best: Vec<f64>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed {what} at line {line}: {reason}")]
    Parse {
        what: &'static str,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by user-supplied configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Config(_) | Error::Parse { .. }
        )
    }
}
