//! Parallel maximal biclique enumeration (MBE) for bipartite graphs.
//!
//! The search is the classic branch-and-bound over the four sets `L`, `R`,
//! `P`, `Q`, made recursion-free with compact arrays (one fixed permutation
//! per set plus per-level boundary pointers) and parallelized by handing
//! first-level subtrees to workers through an atomic claim cursor, with
//! k-level work stealing to rebalance skewed search forests.
//!
//! The crate is organized along the moving parts of that design:
//!
//! - [`graph`]: immutable compressed adjacency for both sides, shared
//!   read-only by all workers.
//! - [`compact`]: the compact array replacing per-level set copies.
//! - [`engine`]: the iterative depth-first search over one subtree.
//! - [`scheduler`]: coarse-grained task claiming and the stealing protocol.
//! - [`oracle`]: brute-force and reference enumerators for verification.
//! - [`stats`]: per-worker phase timing and workload reports.
//! - [`synthetic`]: random and skewed graph generators for tests and benches.

pub mod compact;
pub mod engine;
pub mod graph;
pub mod oracle;
pub mod scheduler;
pub mod stats;
pub mod synthetic;

pub use compact::{CompactArray, Direction};
pub use engine::{
    run_full, run_task, Biclique, BicliqueSink, CollectSink, CountSink, EngineOptions, NoSteal,
    SearchState, StealHook,
};
pub use graph::{BipartiteGraph, GraphError, LoadOptions, Side, VertexId};
pub use oracle::{closure_enumerate, reference_recursive_mbea, BicliqueSet, OracleError};
pub use scheduler::{
    run_parallel, ConfigError, Directive, GlobalTaskPool, Mode, ParallelConfig, RunOutcome,
};
pub use stats::{report, Phase, PhaseBreakdown, RunReport};
