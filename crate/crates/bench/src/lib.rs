//! Shared helpers for the enumeration benchmarks.

use mbe_core::{run_parallel, BipartiteGraph, Mode, ParallelConfig};

/// Counting run with timing and self-checks off, as a benchmark target.
pub fn count(g: &BipartiteGraph, n_workers: usize, k: u32) -> u64 {
    run_parallel(
        g,
        ParallelConfig {
            n_workers,
            k,
            mode: Mode::Count,
            timing: false,
            debug_checks: Some(false),
        },
    )
    .expect("valid configuration")
    .count
}
