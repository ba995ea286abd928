use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {n}: must be even and at least 16")]
    InvalidGrid { n: usize },

    #[error("grid mismatch: {left} points vs {right} points")]
    GridMismatch { left: usize, right: usize },

    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("coefficients are not Hermitian-symmetric at wavenumber {k}")]
    NotHermitian { k: i64 },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("negative Sobolev order {s} requires a mean-zero field (mean = {mean:e})")]
    NonZeroMean { s: f64, mean: f64 },

    #[error("positivity violated: min u = {min:e} <= {threshold:e}")]
    Positivity { min: f64, threshold: f64 },

    #[error("positivity abort at t = {t} (step {step}): min u = {min:e} <= floor {floor:e}")]
    PositivityAbort { t: f64, step: usize, min: f64, floor: f64 },

    #[error("non-finite field at t = {t} (step {step})")]
    NonFiniteField { t: f64, step: usize },

    #[error("run with delta = {delta} failed: {source}")]
    Continuation {
        delta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("trajectory error: {0}")]
    Trajectory(String),

    #[error("roots {left} and {right} coincide (multiple root)")]
    MultipleRoot { left: f64, right: f64 },

    #[error("interlacing violated in interval {index}: {value} not in ({lo}, {hi})")]
    Interlacing {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("density has zero total mass")]
    ZeroMass,

    #[error("density support touches the periodic seam")]
    SeamSupport,

    #[error("config: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
