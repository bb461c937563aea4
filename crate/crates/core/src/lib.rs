//! Exact computation and verification of weighted zero-sum constants
//! `D_{A,B}`, `C_{A,B}`, `E_{A,B}` over `M = Z_m^r`.

pub mod algebra;
mod bitset;
pub mod certificate;
pub mod checker;
pub mod error;
pub mod oracle;
pub mod proofs;
pub mod search;
pub mod suite;
pub mod weights;

pub use algebra::{Element, ModuleSpec, Scalar, Sequence};
pub use certificate::{compute_cached, Cache, CacheKey, CertificateRecord};
pub use checker::{check_full, find_subsequence, SubseqConstraint, Witness};
pub use error::{Error, Result};
pub use oracle::{brute_force_oracle, OracleBudget};
pub use search::{
    compute_constant, is_free, max_free_length, ConstantCertificate, ConstantKind, SearchOptions,
    SearchOutcome, SearchStats,
};
pub use weights::WeightConfig;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
