use thiserror::Error;

/// Errors raised by the group engine and the constructions built on it.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("matrix is not unipotent")]
    NotUnipotent,
    #[error("matrix logarithm/exponential undefined: nilpotence index {index} exceeds p = {p}")]
    LogDomain { index: usize, p: u32 },
    #[error("element cap exceeded: reached {count} elements (cap {cap})")]
    CapExceeded { count: usize, cap: usize },
    #[error("group of order {order} is not a p-group for p = {p}")]
    NotPGroup { order: usize, p: u32 },
    #[error("generator {index} is not invertible")]
    NotInvertible { index: usize },
    #[error("subgroups live in different ambient groups")]
    AmbientMismatch,
    #[error("element is not a member of the ambient group")]
    NotAMember,
    #[error("k = {k} outside the admissible range [3, {p}]")]
    InvalidK { k: usize, p: u32 },
    #[error("undefined for the trivial group")]
    TrivialGroup,
    #[error("action is not faithful")]
    NotFaithful,
    #[error("no abelian product subgroup of maximum order lies outside V (V is not an F-module)")]
    NoProductMaximal,
    #[error("unsupported instance: {0}")]
    UnsupportedInstance(String),
    #[error("[v, A] is not abelian")]
    NonAbelianBracket,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("nilpotence class {class} exceeds 3")]
    ClassTooHigh { class: usize },
    #[error("log image not closed: {0}")]
    ClosureFailure(String),
    #[error("conjugates do not commute pairwise")]
    NonCommutingConjugates,
    #[error("no quadratic element in the first Omega of Z(N)")]
    NoQuadraticInOmega1ZN,
    #[error("theorem contradiction: {0}")]
    Contradiction(String),
    #[error("{0}")]
    Input(String),
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
