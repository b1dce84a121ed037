use thiserror::Error;

pub type Result<T> = std::result::Result<T, ThetaError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThetaError {
    #[error("variable count mismatch: expected {expected}, got {got}")]
    VariableMismatch { expected: usize, got: usize },

    #[error("polynomial parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("reducer set with {0} polynomials is not flagged confluent; normal forms would depend on reduction order")]
    NotConfluent(usize),

    #[error("marked monomial {marked} is not the leading monomial of its reducer (leading is {leading})")]
    BadMarking { marked: String, leading: String },

    #[error("ideal is the whole ring (leading monomial is 1)")]
    UnitIdeal,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("duplicate point at index {0}")]
    DuplicatePoint(usize),

    #[error("level {requested} exceeds the oracle's constructed depth {built}")]
    LevelTooHigh { requested: usize, built: usize },

    #[error("polynomial reduces outside the constructed basis (degree {degree} > {max_degree})")]
    OutsideBasis { degree: u32, max_degree: u32 },

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("problem is infeasible (phase-I optimum {0:.3e})")]
    Infeasible(f64),

    #[error("objective is unbounded")]
    Unbounded,

    #[error("solver failed: {0}")]
    Numerical(String),

    #[error("certificate verification failed: largest residual coefficient {0:.3e}")]
    Verification(f64),
}
