use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported dimension d={0} (only 1 and 2 are supported)")]
    UnsupportedDimension(usize),

    #[error("axis {axis} out of range for d={d}")]
    InvalidAxis { axis: usize, d: usize },

    #[error("mode {mode:?} is not resolvable on the lattice with n={n}")]
    ModeOutOfRange { mode: Vec<i64>, n: usize },

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("profile leaves [0,1]: value {value} at {location}")]
    ProfileOutOfRange { value: f64, location: String },

    #[error("state space too large: {sites} sites (limit {limit})")]
    StateSpaceTooLarge { sites: usize, limit: usize },

    #[error("covariance is indefinite: most negative eigenvalue {min_eigenvalue:e}")]
    IndefiniteCovariance { min_eigenvalue: f64 },

    #[error("observable has no closed-form Gaussian expectation: {0}")]
    NoClosedForm(String),

    #[error("observable not supported by this engine: {0}")]
    UnsupportedObservable(String),

    #[error("noise-dominated rows: {0}")]
    NoiseDominated(String),

    #[error("rate fit needs at least 3 usable rows, got {0}")]
    InsufficientRows(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
