use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("cube at level {level} is the base cube and has no parent")]
    LevelOverflow { level: u32 },
    #[error("cube at level 0 has no children")]
    NoChildren,
    #[error("cube {0} is not a valid dyadic cube of the base grid")]
    InvalidCube(String),
    #[error("dimension mismatch: expected d={expected_d} K={expected_k}, found d={found_d} K={found_k}")]
    ShapeMismatch {
        expected_d: usize,
        expected_k: u32,
        found_d: usize,
        found_k: u32,
    },
    #[error("unsupported grid shape d={d} K={k}")]
    UnsupportedShape { d: usize, k: u32 },
    #[error("truncation level must be non-negative, got {0}")]
    NegativeTruncation(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("token {token:?} is not a rational number")]
    BadRational { token: String },
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("family is not saturated: {0} is missing")]
    UnsaturatedFamily(String),
    #[error("maximal function undefined at cell {cell}: no admissible cube covers it")]
    UndefinedValue { cell: usize },
    #[error("degenerate denominator: boundary inside the cube is empty but the set has positive measure")]
    DegenerateDenominator,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("function takes negative values on the cube")]
    NegativeValues,
    #[error("cube {0} is not admissible in the family")]
    NotAdmissible(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
