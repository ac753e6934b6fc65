use thiserror::Error;

/// Errors raised by constructors and operations across the crate.
///
/// Law checks never fail with an `Error`; they return a
/// [`LawReport`](crate::report::LawReport) instead.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Two interfaces, spaces or dimensions that must agree do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A point is not an element of the space it was used in.
    #[error("ill-typed point: {0}")]
    IllTyped(String),

    /// A Gaussian was pushed through a map that is not affine.
    #[error("nonlinear map applied to a Gaussian: {0}; use the sampling path instead")]
    NonlinearGaussian(String),

    /// A Kleisli operation mixes distribution kinds that have no exact form.
    #[error("unsupported distribution combination: {0}; use the sampling path instead")]
    Unsupported(String),

    /// A covariance or Hessian could not be inverted.
    #[error("singular matrix in {context} (condition number {condition:.3e})")]
    Singular { context: String, condition: f64 },

    /// Weights, covariances or other parameters violate their invariants.
    #[error("invalid parameter: {0}")]
    Invalid(String),

    /// A stochastic map was supplied where a deterministic one is required.
    #[error("expected a deterministic map: {0}")]
    NotDeterministic(String),

    /// A time value is not representable on the system's clock.
    #[error("time {0} is not an integer multiple of the clock step")]
    OffGrid(f64),

    /// Something could not be enumerated because it is infinite or too large.
    #[error("not enumerable: {0}")]
    NotEnumerable(String),

    /// JSON input did not match the expected schema.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl Error {
    /// A stable name for the variant, used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::IllTyped(_) => "ill_typed",
            Error::NonlinearGaussian(_) => "nonlinear_gaussian",
            Error::Unsupported(_) => "unsupported",
            Error::Singular { .. } => "singular",
            Error::Invalid(_) => "invalid",
            Error::NotDeterministic(_) => "not_deterministic",
            Error::OffGrid(_) => "off_grid",
            Error::NotEnumerable(_) => "not_enumerable",
            Error::Parse(_) => "parse",
        }
    }
}
