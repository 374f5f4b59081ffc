use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters violate a type invariant (negative scale, |rho| > 1, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The operation is well defined but not supported for these inputs.
    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    /// A series hit its term budget before the tail bound met tolerance.
    #[error("series did not converge after {terms} terms (tail bound {tail_bound:e})")]
    NonConvergence { terms: usize, tail_bound: f64 },

    /// The density is unbounded (or has no finite value) at this point.
    #[error("singular point at x = {x}")]
    Singular { x: f64 },

    /// Numerical Fourier inversion could not reach the requested accuracy.
    #[error("inversion error estimate {achieved:e} exceeds tolerance {requested:e}")]
    InversionAccuracy { achieved: f64, requested: f64 },

    /// Adaptive quadrature could not reach the requested accuracy.
    #[error("quadrature error estimate {achieved:e} exceeds tolerance {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },
}

impl Error {
    /// Short stable tag used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidParams(_) => "invalid_params",
            Error::Unsupported(_) => "unsupported",
            Error::NonConvergence { .. } => "nonconvergence",
            Error::Singular { .. } => "singular",
            Error::InversionAccuracy { .. } => "inversion_accuracy",
            Error::Quadrature { .. } => "quadrature",
        }
    }

    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::InversionAccuracy { .. } | Error::Quadrature { .. }
        )
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
