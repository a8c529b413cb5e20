//! Per-worker phase timing and workload reporting.
//!
//! Workers accumulate wall time into one bucket per search phase plus
//! fetch/steal/idle, read from a monotonic clock at phase boundaries; timer
//! overhead is accepted rather than compensated, and timing can be disabled
//! entirely. Separately, each worker records its total on-CPU time (two
//! thread-clock reads per worker), which is what the load-distribution
//! summary normalizes: when workers outnumber cores, wall buckets inflate
//! with scheduler multiplexing, while CPU time still measures the work each
//! worker actually executed. Neither clock affects the enumeration result.

use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Nanoseconds of CPU time consumed by the calling thread.
#[cfg(unix)]
pub fn thread_cpu_ns() -> u64 {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: plain syscall writing into the local timespec.
    unsafe {
        libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts);
    }
    ts.tv_sec as u64 * 1_000_000_000 + ts.tv_nsec as u64
}

#[cfg(not(unix))]
pub fn thread_cpu_ns() -> u64 {
    use std::sync::OnceLock;
    static START: OnceLock<Instant> = OnceLock::new();
    START.get_or_init(Instant::now).elapsed().as_nanos() as u64
}

pub const PHASE_COUNT: usize = 8;

/// Execution phases of one worker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Scoring and picking the next candidate.
    CandidateSelection = 0,
    /// Building the child left side.
    LConstruction = 1,
    /// Reverse scan plus the retired-set check.
    MaximalityChecking = 2,
    /// Moving fully-connected candidates into the right side and emitting.
    MaximalExpansion = 3,
    /// Claiming a task and loading its frame into worker-local state.
    SubtreeFetching = 4,
    /// Publishing, sorting and rendezvous bookkeeping for stealing.
    WorkStealing = 5,
    /// Blocked at a stealing rendezvous or parked after finishing.
    Idle = 6,
    /// Everything else in the worker loop.
    Other = 7,
}

pub const PHASE_NAMES: [&str; PHASE_COUNT] = [
    "candidate_selection",
    "l_construction",
    "maximality_checking",
    "maximal_expansion",
    "subtree_fetching",
    "work_stealing",
    "idle",
    "other",
];

/// Accumulated per-worker durations (nanoseconds) and exact counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhaseBreakdown {
    pub nanos: [u64; PHASE_COUNT],
    /// Total on-CPU time of the worker thread.
    pub cpu_nanos: u64,
    pub subtrees_executed: u64,
    pub bicliques_emitted: u64,
    pub tasks_stolen: u64,
}

impl PhaseBreakdown {
    pub fn total_nanos(&self) -> u64 {
        self.nanos.iter().sum()
    }

    /// Work actually executed by this worker; blocked waits consume none.
    pub fn busy_nanos(&self) -> u64 {
        self.cpu_nanos
    }

    /// Wall time outside the idle bucket.
    pub fn non_idle_wall_nanos(&self) -> u64 {
        self.total_nanos() - self.nanos[Phase::Idle as usize]
    }
}

/// Accumulates `duration` nanoseconds into the named phase.
pub fn record_phase(b: &mut PhaseBreakdown, phase: Phase, nanos: u64) {
    b.nanos[phase as usize] += nanos;
}

/// Phase state machine around a monotonic clock: the worker is always in
/// exactly one phase; switching attributes the elapsed wall time to the old
/// one. On-CPU time is sampled only at construction and finish.
pub struct PhaseTimer {
    enabled: bool,
    current: Phase,
    mark: Instant,
    cpu_start: u64,
    pub breakdown: PhaseBreakdown,
}

impl PhaseTimer {
    pub fn new(enabled: bool) -> PhaseTimer {
        PhaseTimer {
            enabled,
            current: Phase::Other,
            mark: Instant::now(),
            cpu_start: if enabled { thread_cpu_ns() } else { 0 },
            breakdown: PhaseBreakdown::default(),
        }
    }

    #[inline]
    pub fn switch_to(&mut self, next: Phase) {
        if !self.enabled {
            return;
        }
        let now = Instant::now();
        record_phase(
            &mut self.breakdown,
            self.current,
            (now - self.mark).as_nanos() as u64,
        );
        self.current = next;
        self.mark = now;
    }

    /// Closes the current phase and returns the accumulated breakdown.
    pub fn finish(mut self) -> PhaseBreakdown {
        self.switch_to(Phase::Other);
        if self.enabled {
            self.breakdown.cpu_nanos = thread_cpu_ns().saturating_sub(self.cpu_start);
        }
        self.breakdown
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PhaseNanos {
    pub candidate_selection: u64,
    pub l_construction: u64,
    pub maximality_checking: u64,
    pub maximal_expansion: u64,
    pub subtree_fetching: u64,
    pub work_stealing: u64,
    pub idle: u64,
    pub other: u64,
}

impl From<&PhaseBreakdown> for PhaseNanos {
    fn from(b: &PhaseBreakdown) -> Self {
        PhaseNanos {
            candidate_selection: b.nanos[0],
            l_construction: b.nanos[1],
            maximality_checking: b.nanos[2],
            maximal_expansion: b.nanos[3],
            subtree_fetching: b.nanos[4],
            work_stealing: b.nanos[5],
            idle: b.nanos[6],
            other: b.nanos[7],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WorkerReport {
    pub id: usize,
    pub phases: PhaseNanos,
    pub cpu_ns: u64,
    pub subtrees: u64,
    pub emitted: u64,
    pub stolen: u64,
}

/// Five-number summary plus standard deviation of normalized worker times.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Distribution {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub stddev: f64,
}

/// Run metadata plus per-worker breakdowns, serialized as the stats JSON
/// document. `distribution` summarizes per-worker busy (on-CPU) time
/// normalized to its mean; `distribution_with_idle` summarizes total wall
/// time including idle, since published load-distribution figures are
/// ambiguous about whether idle was plotted.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub dataset: String,
    pub n_u: usize,
    pub n_v: usize,
    pub edges: usize,
    pub count: u64,
    pub n_workers: usize,
    pub k: u32,
    pub wall_ms: f64,
    pub workers: Vec<WorkerReport>,
    pub distribution: Distribution,
    pub distribution_with_idle: Distribution,
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

fn distribution_of(values: &[f64]) -> Distribution {
    if values.is_empty() {
        return Distribution {
            min: 0.0,
            q1: 0.0,
            median: 0.0,
            q3: 0.0,
            max: 0.0,
            stddev: 0.0,
        };
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    // Normalize to the mean; an all-zero vector normalizes to all-ones.
    let normalized: Vec<f64> = if mean > 0.0 {
        values.iter().map(|v| v / mean).collect()
    } else {
        vec![1.0; values.len()]
    };
    let mut sorted = normalized.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let var = normalized.iter().map(|v| (v - 1.0) * (v - 1.0)).sum::<f64>()
        / normalized.len() as f64;
    Distribution {
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: *sorted.last().unwrap(),
        stddev: var.sqrt(),
    }
}

/// Metadata describing one run, supplied by the caller of [`report`].
pub struct RunMeta<'a> {
    pub dataset: &'a str,
    pub n_u: usize,
    pub n_v: usize,
    pub edges: usize,
    pub count: u64,
    pub n_workers: usize,
    pub k: u32,
    pub wall_ms: f64,
}

/// Builds the report document; a pure function of its inputs.
pub fn report(meta: &RunMeta, workers: &[PhaseBreakdown]) -> RunReport {
    let busy: Vec<f64> = workers.iter().map(|b| b.busy_nanos() as f64).collect();
    let with_idle: Vec<f64> = workers.iter().map(|b| b.total_nanos() as f64).collect();
    RunReport {
        dataset: meta.dataset.to_string(),
        n_u: meta.n_u,
        n_v: meta.n_v,
        edges: meta.edges,
        count: meta.count,
        n_workers: meta.n_workers,
        k: meta.k,
        wall_ms: meta.wall_ms,
        workers: workers
            .iter()
            .enumerate()
            .map(|(id, b)| WorkerReport {
                id,
                phases: PhaseNanos::from(b),
                cpu_ns: b.cpu_nanos,
                subtrees: b.subtrees_executed,
                emitted: b.bicliques_emitted,
                stolen: b.tasks_stolen,
            })
            .collect(),
        distribution: distribution_of(&busy),
        distribution_with_idle: distribution_of(&with_idle),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn breakdown_with_busy(busy: u64, idle: u64) -> PhaseBreakdown {
        let mut b = PhaseBreakdown::default();
        record_phase(&mut b, Phase::CandidateSelection, busy);
        record_phase(&mut b, Phase::Idle, idle);
        b.cpu_nanos = busy;
        b
    }

    #[test]
    fn record_accumulates() {
        let mut b = PhaseBreakdown::default();
        record_phase(&mut b, Phase::CandidateSelection, 5);
        record_phase(&mut b, Phase::CandidateSelection, 5);
        assert_eq!(b.nanos[Phase::CandidateSelection as usize], 10);
    }

    #[test]
    fn fresh_breakdown_is_zero() {
        let b = PhaseBreakdown::default();
        assert_eq!(b.total_nanos(), 0);
        assert_eq!(b.subtrees_executed, 0);
    }

    #[test]
    fn single_worker_normalizes_to_one() {
        let meta = RunMeta {
            dataset: "synthetic",
            n_u: 1,
            n_v: 1,
            edges: 1,
            count: 0,
            n_workers: 1,
            k: 2,
            wall_ms: 0.0,
        };
        let r = report(&meta, &[breakdown_with_busy(1234, 10)]);
        assert_eq!(r.distribution.max, 1.0);
        assert_eq!(r.distribution.min, 1.0);
        assert_eq!(r.distribution.stddev, 0.0);
    }

    #[test]
    fn identical_workers_have_zero_stddev() {
        let meta = RunMeta {
            dataset: "synthetic",
            n_u: 1,
            n_v: 1,
            edges: 1,
            count: 0,
            n_workers: 4,
            k: 2,
            wall_ms: 0.0,
        };
        let workers: Vec<_> = (0..4).map(|_| breakdown_with_busy(500, 7)).collect();
        let r = report(&meta, &workers);
        assert_eq!(r.distribution.stddev, 0.0);
        assert_eq!(r.distribution.median, 1.0);
    }

    #[test]
    fn rebalanced_workload_reduces_max_over_mean() {
        let meta = RunMeta {
            dataset: "synthetic",
            n_u: 1,
            n_v: 1,
            edges: 1,
            count: 0,
            n_workers: 4,
            k: 1,
            wall_ms: 0.0,
        };
        // Scripted scheduler outcome: without stealing one worker does almost
        // everything; with stealing the same total is spread evenly.
        let skewed: Vec<_> = [1000u64, 10, 10, 10]
            .iter()
            .map(|&b| breakdown_with_busy(b, 1000 - b))
            .collect();
        let balanced: Vec<_> = [260u64, 260, 255, 255]
            .iter()
            .map(|&b| breakdown_with_busy(b, 0))
            .collect();
        let r1 = report(&meta, &skewed);
        let r2 = report(&meta, &balanced);
        assert!(r2.distribution.max < r1.distribution.max);
    }

    #[test]
    fn report_is_pure() {
        let meta = RunMeta {
            dataset: "d",
            n_u: 3,
            n_v: 4,
            edges: 5,
            count: 6,
            n_workers: 2,
            k: 2,
            wall_ms: 1.5,
        };
        let workers = vec![breakdown_with_busy(10, 1), breakdown_with_busy(20, 2)];
        let a = serde_json::to_string(&report(&meta, &workers)).unwrap();
        let b = serde_json::to_string(&report(&meta, &workers)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn timer_disabled_records_nothing() {
        let mut t = PhaseTimer::new(false);
        t.switch_to(Phase::CandidateSelection);
        std::thread::sleep(std::time::Duration::from_millis(1));
        let b = t.finish();
        assert_eq!(b.total_nanos(), 0);
    }

    #[test]
    fn timer_attributes_elapsed_to_previous_phase() {
        let mut t = PhaseTimer::new(true);
        t.switch_to(Phase::CandidateSelection);
        std::thread::sleep(std::time::Duration::from_millis(5));
        t.switch_to(Phase::Idle);
        let b = t.finish();
        assert!(b.nanos[Phase::CandidateSelection as usize] >= 4_000_000);
        assert!(
            b.nanos[Phase::CandidateSelection as usize] > b.nanos[Phase::Idle as usize]
        );
    }
}
