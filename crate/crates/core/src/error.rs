use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical instability at k={k}: pre-clamp probability {value:e} outside [0,1]")]
    NumericalInstability { k: usize, value: f64 },

    #[error("unknown law `{0}` for this operation")]
    UnknownLaw(String),

    #[error("unsupported outer function `{0}`")]
    UnsupportedOuterFunction(String),

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("tail mass {0:e} too heavy for moment summation")]
    TailTooHeavy(f64),

    #[error("empty parameter grid")]
    EmptyGrid,

    #[error("rejection budget of {cap} exceeded")]
    RejectionBudgetExceeded { cap: u64 },

    #[error("route {route} is incompatible with a={a}")]
    IncompatibleRoute { route: char, a: f64 },

    #[error("singular composition: constant term {0:e} at a branch point of the outer function")]
    SingularComposition(f64),

    #[error("insufficient sample: need at least {need}, got {got}")]
    InsufficientSample { need: usize, got: usize },

    #[error("variate overflow: {0}")]
    VariateOverflow(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
