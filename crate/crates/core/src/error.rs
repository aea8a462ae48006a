use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {left} vs {right} points")]
    GridMismatch { left: usize, right: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("t = {0} lies outside [0, 1]")]
    Domain(f64),
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),
    #[error("invalid shape grid: {0}")]
    InvalidShape(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("weights must average to 1, got mean {0}")]
    WeightNormalization(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate size: {0}")]
    DegenerateSize(String),
    #[error("near-constant trajectory: range {0} below floor")]
    NearConstant(f64),
    #[error("ill-conditioned design: {0}")]
    IllConditioned(String),
    #[error("empty kernel neighborhood at x = {0}")]
    EmptyNeighborhood(f64),
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical underflow: {0}")]
    Underflow(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("non-numeric value `{value}` in column `{column}` (line {line})")]
    NonNumeric { column: String, value: String, line: u64 },
    #[error("subject `{0}` has fewer than 2 distinct time points")]
    TooFewPoints(String),
    #[error("covariate ids do not match subjects: {0}")]
    CovariateMismatch(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
