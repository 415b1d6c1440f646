//! Mixin selection for ring signatures under coin-indistinguishability.
//!
//! The crate models a UTXO chain trace, enumerates spent-coin permutations
//! exactly, verifies epsilon-coin-indistinguishability both by enumeration
//! and by the constant-time rules that hold on disjoint-superset ring sets,
//! and solves the budgeted maximum-diversity mixin selection problem with
//! four engines (progressive knapsack, best-response game, greedy, random)
//! plus an exact reference solver. A batching framework drives spends over
//! a block stream, and generators plus a sweep harness reproduce the
//! experiment grids.

pub mod chain;
pub mod ci;
pub mod datagen;
pub mod ds;
pub mod engines;
pub mod error;
pub mod framework;
pub mod harness;
pub mod oracle;
pub mod rational;

pub use chain::{load_trace, related_rs_set, save_trace, Block, ChainTrace, Coin, CoinId, RelatedRsSet, RingSignature, RsId, TxId};
pub use ci::{check_ci_full, check_cik, check_cik_fast, fast_required_ratio, posterior_bound, CiReport, IterativeState};
pub use ds::{check_ds, extract_modules, module_union_degree, super_rs, union_diversity, ModuleId, ModuleKind, ModuleSummary};
pub use engines::{run_engine, EngineKind, EngineParams, ProblemInstance, SelectionResult};
pub use error::{Error, Result};
pub use framework::{build_batches, select_in_batch, Batch, SpendRequest};
pub use oracle::{build_tree, PermutationTree, DEFAULT_LEAF_CAP};
pub use rational::{CiLevel, Prob};
