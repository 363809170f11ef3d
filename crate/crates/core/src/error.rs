use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("missing config key `{0}`")]
    MissingKey(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("`{name}` must be a positive length, got {value}")]
    NonPositiveLength { name: &'static str, value: f64 },
    #[error("`{name}` must be finite and positive, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("unsupported phase count {0}, only 3 and 5 phase windings are modeled")]
    UnsupportedPhaseCount(usize),
    #[error("gap offset {offset} m must satisfy 0 <= g0 < g = {gap} m")]
    OffsetExceedsGap { offset: f64, gap: f64 },
    #[error("at least two magnets per pole are required, got {0}")]
    InvalidMagnetCount(usize),
    #[error("harmonic truncation must be an odd integer >= 1, got {0}")]
    InvalidTruncation(usize),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("boundary system for harmonic n = {n} is singular")]
    SingularSystem { n: usize },
    #[error("point y = {y} m lies outside the modeled domain [0, {y_max}] m")]
    OutOfDomain { y: f64, y_max: f64 },
    #[error("iterative solve stalled at relative residual {residual:e}")]
    NoConvergence { residual: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("mover velocity is zero")]
    ZeroVelocity,
    #[error("copper loss is zero, the objective is undefined")]
    ZeroLoss,
    #[error("objective term `{0}` is zero or negative")]
    DegenerateObjective(&'static str),
    #[error("empty or inverted bounds for `{0}`")]
    EmptyBounds(&'static str),
    #[error("writing output failed: {0}")]
    Output(String),
}
