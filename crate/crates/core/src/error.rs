use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("position {0} is negative; potentials live on the half-line")]
    NegativePosition(f64),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("truncation level {requested} exceeds the {available} stored bumps")]
    TruncationOutOfRange { requested: usize, available: usize },

    #[error("spectral parameter {re}{im:+}i must have positive real part")]
    NonPositiveSpectral { re: f64, im: f64 },

    #[error("{steps} integration steps per bump is below the minimum of {min}")]
    StepsTooSmall { steps: usize, min: usize },

    #[error("cannot propagate backwards from x = {from} to x = {to}")]
    TargetBehindState { from: f64, to: f64 },

    #[error("length {0} must be positive")]
    NonPositiveLength(f64),

    #[error("x = {x} lies outside the comparison window [{lo}, {hi}]")]
    OutsideWindow { x: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no trial length up to {max_length} satisfied the truncated-kernel criterion")]
    HatNNotFound { max_length: f64 },

    #[error("eigenvalue search failed: {0}")]
    Eigenvalue(String),

    #[error("oracle resolution insufficient: {oracle} matrix eigenvalues vs {phase} from the phase count below {cutoff}")]
    InsufficientResolution {
        oracle: usize,
        phase: usize,
        cutoff: f64,
    },

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
