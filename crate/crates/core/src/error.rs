use thiserror::Error;

use crate::search::ConstantCertificate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid module Z_{modulus}^{rank}: modulus must be >= 2 and rank >= 1")]
    InvalidModule { modulus: u32, rank: u32 },

    #[error("cardinality {modulus}^{rank} does not fit in a native integer")]
    CardinalityOverflow { modulus: u32, rank: u32 },

    #[error("element has {got} coordinates, module rank is {expected}")]
    RankMismatch { expected: u32, got: usize },

    #[error("weight config is over Z_{config} but the module is over Z_{module}")]
    ModulusMismatch { module: u32, config: u32 },

    #[error("scalar {value} is not a unit modulo {modulus}")]
    NonUnitScalar { value: u32, modulus: u32 },

    #[error("weight set {0} is empty")]
    EmptyWeightSet(&'static str),

    #[error("weight set {0} contains a residue congruent to 0")]
    ZeroWeight(&'static str),

    #[error("sequence is empty")]
    EmptySequence,

    #[error("bad subsequence constraint: {0}")]
    BadConstraint(String),

    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("search cap must be at least 1")]
    CapTooSmall,

    #[error("search exceeded the node budget of {0}")]
    NodeBudgetExceeded(u64),

    #[error("search incomplete: value is at least {}", .0.value)]
    SearchIncomplete(Box<ConstantCertificate>),

    #[error("input sequence is not free: {0}")]
    InputNotFree(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("internal proof violation: {0}")]
    InternalProofViolation(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
