use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("no irreducible polynomial of degree {deg} over F_{p} found")]
    SearchExhausted { p: u64, deg: u32 },
    #[error("degree {source_deg} does not divide degree {target_deg}")]
    DegreeMismatch { source_deg: u32, target_deg: u32 },
    #[error("{what} of size {size} exceeds the cap {cap}")]
    TooLarge { what: &'static str, size: u128, cap: u128 },
    #[error("precision {s} is too large for p = {p}")]
    PrecisionTooLarge { p: u64, s: u32 },
    #[error("Witt backends disagree on {op} of {lhs:?} and {rhs:?}")]
    BackendMismatch { op: &'static str, lhs: Vec<u64>, rhs: Vec<u64> },
    #[error("vertex ({a}, {height}) of the polygon is not integral")]
    NonIntegralBreakPoint { a: usize, height: String },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("index {index} out of range 1..={max}")]
    BadIndex { index: usize, max: usize },
    #[error("infeasible polygon: {0}")]
    Infeasible(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("precision s = {s} too small: {reason}")]
    PrecisionTooSmall { s: u32, reason: String },
    #[error("matrix is not an isogeny (determinant vanishes up to precision {max_s})")]
    NotIsogeny { max_s: u32 },
    #[error("rank {rank} exceeds the cap {cap}")]
    RankCapExceeded { rank: usize, cap: usize },
    #[error("crystals live over different rings or twists")]
    RingMismatch,
    #[error("no slope splitting: {0}")]
    NoSplit(String),
    #[error("geometric count did not stabilise: {0}")]
    NoStabilization(String),
    #[error("malformed Artin-Schreier system: {0}")]
    MalformedSystem(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("point budget exceeded: {points} > {budget}")]
    BudgetExceeded { points: u128, budget: u128 },
    #[error("fiber at {point} has determinant valuation {found:?}, expected {expected}")]
    NotIsogenyAtPoint { point: String, found: Option<u32>, expected: u32 },
    #[error("element does not belong to this field or ring")]
    ForeignElement,
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid input at {pointer}: {message}")]
    Input { pointer: String, message: String },
}
