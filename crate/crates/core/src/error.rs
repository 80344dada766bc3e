use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid block index: {0}")]
    InvalidBlockIndex(String),

    #[error("invalid exponent `{0}`")]
    InvalidExponent(String),

    #[error("cannot parse number `{0}`")]
    Parse(String),

    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point budget exceeded: {requested} lattice points requested, cap is {cap}")]
    PointBudget { requested: u128, cap: u128 },

    #[error("exact weight numerators overflow 128 bits for this block index and box radius")]
    WeightOverflow,

    #[error("threshold {threshold} is beyond the reliable range of the table (boundary weight {boundary})")]
    ThresholdOutOfRange { threshold: f64, boundary: f64 },

    #[error("thresholds must be finite and ascending")]
    UnsortedThresholds,

    #[error("the endpoint pair (p1, p2) = (1, inf) is not supported here")]
    UnsupportedEndpoint,

    #[error("parameters lie on the regime boundary {0}; no rate is available there")]
    RegimeBoundary(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("rank {rank} is outside the range where the finite-dimensional equivalence holds (N = {dimension})")]
    RankOutOfRange { rank: u64, dimension: u64 },

    #[error("missing weight for support point at level {level}")]
    MissingWeight { level: u32 },

    #[error("support point at level {level} is not covered by the weight table")]
    SupportOutsideTable { level: u32 },

    #[error("degenerate design matrix: {0}")]
    DegenerateFit(String),

    #[error("sequence tail is not certified monotone")]
    NonMonotoneTail,

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Violations of a result's hypotheses, as opposed to bad input or
    /// resource limits.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Precondition(_) | Error::RegimeBoundary(_) | Error::UnsupportedEndpoint | Error::RankOutOfRange { .. }
        )
    }
}
