//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("trace integrity violation: {0}")]
    Integrity(String),
    #[error("ring signature set is not disjoint-superset: {a} and {b} overlap without nesting")]
    NotDisjointSuperset { a: String, b: String },
    #[error("permutation tree is infeasible: no valid spent coin for {rs_id}")]
    InfeasibleTree { rs_id: String },
    #[error("permutation tree would exceed the leaf cap of {cap} at depth {depth}")]
    LeafCapExceeded { cap: u64, depth: usize },
    #[error("coin {coin} is not a member of ring signature {rs}")]
    CoinNotInRs { coin: String, rs: String },
    #[error("unknown identifier: {0}")]
    UnknownId(String),
    #[error("ring signature degree must be at least 1")]
    DegreeInvalid,
    #[error("internal invariant violation: zero spend marginal for in-ring coin {coin}")]
    ZeroMarginal { coin: String },
    #[error("prior weights are all zero over the ring")]
    AllZeroPrior,
    #[error("no eligible composition exists (existence preconditions violated)")]
    NoEligibleComposition,
    #[error("exhaustive solver cap exceeded: {modules} modules > cap {cap}")]
    ExhaustiveCapExceeded { modules: usize, cap: usize },
    #[error("best-response dynamics exceeded {max_sweeps} sweeps")]
    MaxSweepsExceeded { max_sweeps: u64 },
    #[error("ring signature {rs_id} is not contained in any single batch universe")]
    SpanningRs { rs_id: String },
    #[error("spend coin {coin} is outside the batch universe")]
    SpendOutsideBatch { coin: String },
    #[error("coin {coin} is already deducibly spent")]
    SpendForced { coin: String },
    #[error("budget {budget} is below the required minimum {minimum}")]
    BudgetTooSmall { budget: u64, minimum: u64 },
    #[error("committing this ring signature would leave exactly one fresh coin in the batch")]
    FreshGuard,
    #[error("generator needs at least {needed} coins, trace has {available}")]
    InsufficientCoins { needed: usize, available: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("engine {engine} failed on seed {seed}: {source}")]
    EngineFailure {
        engine: String,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
