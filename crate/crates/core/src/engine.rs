//! Iterative, recursion-free depth-first enumeration over one search subtree.
//!
//! The search follows the classic four-set branch and bound: pop a candidate
//! `x` from `P`, build `L' = N(x) ∩ L`, reject the branch if any retired
//! vertex in `Q` fully connects to `L'`, otherwise expand `R'` with every
//! candidate fully connected to `L'`, emit `(L', R')`, and descend into the
//! surviving candidates `P'`. Instead of recursion each set is a compact
//! array (or a windowed set for `Q`) and a small frame stack remembers, per
//! level, the candidate whose child subtree is open and the early-stop state.
//!
//! Fine-grained details that matter for performance:
//! - candidate selection scans `P` for the vertex minimizing `|N(x) ∩ L|`
//!   with two early stops (abandon a vertex once its running count exceeds
//!   the current best; accept immediately on matching the previous level
//!   minimum);
//! - common-neighbor counts are computed by a reverse scan over `L'`'s
//!   adjacency into a touched-list buffer, not per `P`/`Q` vertex;
//! - all membership tests go through the compact arrays' lookup tables.

use crate::compact::{CompactArray, Direction};
use crate::graph::{BipartiteGraph, Side, VertexId};
use crate::stats::{Phase, PhaseTimer};

/// Tunables that do not change the enumeration result.
#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    /// Re-verify reverse-scan counts and emission closedness with forward
    /// computations at every level. Expensive; meant for small graphs.
    pub debug_checks: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            debug_checks: cfg!(debug_assertions),
        }
    }
}

/// A maximal biclique with both side ID lists sorted.
#[derive(Debug, Clone, Hash, PartialEq, Eq, PartialOrd, Ord)]
pub struct Biclique {
    pub left: Vec<VertexId>,
    pub right: Vec<VertexId>,
}

impl Biclique {
    pub fn from_slices(left: &[VertexId], right: &[VertexId]) -> Biclique {
        let mut left = left.to_vec();
        let mut right = right.to_vec();
        left.sort_unstable();
        right.sort_unstable();
        Biclique { left, right }
    }
}

/// Consumer of emitted bicliques. Each worker owns one sink; merging across
/// workers happens after they stop.
pub trait BicliqueSink {
    fn emit(&mut self, left: &[VertexId], right: &[VertexId]);
    fn emitted(&self) -> u64;
}

/// Counts emissions without materializing them.
#[derive(Debug, Default)]
pub struct CountSink(pub u64);

impl BicliqueSink for CountSink {
    fn emit(&mut self, _left: &[VertexId], _right: &[VertexId]) {
        self.0 += 1;
    }
    fn emitted(&self) -> u64 {
        self.0
    }
}

/// Collects emissions with sorted sides.
#[derive(Debug, Default)]
pub struct CollectSink(pub Vec<Biclique>);

impl BicliqueSink for CollectSink {
    fn emit(&mut self, left: &[VertexId], right: &[VertexId]) {
        self.0.push(Biclique::from_slices(left, right));
    }
    fn emitted(&self) -> u64 {
        self.0.len() as u64
    }
}

/// Scheduler entry point invoked at the top of every search loop iteration.
pub trait StealHook {
    fn on_iteration(
        &mut self,
        state: &mut SearchState,
        g: &BipartiteGraph,
        timer: &mut PhaseTimer,
    );
}

/// Hook for serial runs: never steals.
pub struct NoSteal;

impl StealHook for NoSteal {
    fn on_iteration(&mut self, _: &mut SearchState, _: &BipartiteGraph, _: &mut PhaseTimer) {}
}

const NOT_MEMBER: u32 = u32::MAX;

/// The maximality-check set `Q`, with per-level windows realized as undo
/// logs: descending drops members with no common neighbor in the child `L'`,
/// retiring appends the tested candidate, ascending replays both in reverse.
///
/// Along one root-to-leaf path every vertex is appended at most once (a
/// candidate is popped at most once per path) and dropped at most once (a
/// dropped vertex never re-enters `Q` below), so the flat undo stacks are
/// bounded by the candidate-side size and total storage stays at four
/// universe-sized arrays regardless of search depth.
pub struct RetiredSet {
    members: Vec<VertexId>,
    /// vertex -> index in `members`, or `NOT_MEMBER`.
    pos: Vec<u32>,
    dropped: Vec<VertexId>,
    appended: Vec<VertexId>,
    /// Per level: how many entries of each undo stack belong to it.
    frames: Vec<(u32, u32)>,
}

impl RetiredSet {
    fn new(universe: usize) -> RetiredSet {
        RetiredSet {
            members: Vec::with_capacity(universe),
            pos: vec![NOT_MEMBER; universe],
            dropped: Vec::with_capacity(universe),
            appended: Vec::with_capacity(universe),
            frames: vec![(0, 0)],
        }
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        self.pos[v as usize] != NOT_MEMBER
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn unlink(&mut self, v: VertexId) {
        let i = self.pos[v as usize] as usize;
        debug_assert!(i != NOT_MEMBER as usize);
        self.members.swap_remove(i);
        self.pos[v as usize] = NOT_MEMBER;
        if i < self.members.len() {
            self.pos[self.members[i] as usize] = i as u32;
        }
    }

    fn link(&mut self, v: VertexId) {
        debug_assert!(!self.contains(v));
        self.pos[v as usize] = self.members.len() as u32;
        self.members.push(v);
    }

    /// Retires a tested candidate into the current level.
    fn insert(&mut self, v: VertexId) {
        self.link(v);
        self.frames.last_mut().unwrap().1 += 1;
        self.appended.push(v);
    }

    /// Opens a child level keeping only members satisfying `keep`.
    fn descend(&mut self, keep: impl Fn(VertexId) -> bool) {
        let mut dropped_now = 0u32;
        let mut i = 0;
        while i < self.members.len() {
            let v = self.members[i];
            if keep(v) {
                i += 1;
            } else {
                self.unlink(v);
                self.dropped.push(v);
                dropped_now += 1;
            }
        }
        self.frames.push((dropped_now, 0));
    }

    /// Discards the child level, restoring the parent's set.
    fn ascend(&mut self) {
        let (dropped, appended) = self.frames.pop().unwrap();
        debug_assert!(!self.frames.is_empty(), "ascend past the root window");
        for _ in 0..appended {
            let v = self.appended.pop().unwrap();
            self.unlink(v);
        }
        for _ in 0..dropped {
            let v = self.dropped.pop().unwrap();
            self.link(v);
        }
    }

    /// Clears to a fresh root window with the given members.
    fn reset(&mut self, members: impl IntoIterator<Item = VertexId>) {
        for i in 0..self.members.len() {
            self.pos[self.members[i] as usize] = NOT_MEMBER;
        }
        self.members.clear();
        self.dropped.clear();
        self.appended.clear();
        self.frames.clear();
        self.frames.push((0, 0));
        for v in members {
            self.link(v);
        }
    }

    fn element_slots(&self) -> usize {
        self.members.capacity() + self.pos.len() + self.dropped.capacity() + self.appended.capacity()
    }
}

/// Common-neighbor tallies for the current level's reverse scan. Resetting
/// touches only the vertices written this round.
pub struct NeighborCountBuffer {
    counts: Vec<u32>,
    touched: Vec<VertexId>,
}

impl NeighborCountBuffer {
    fn new(universe: usize) -> NeighborCountBuffer {
        NeighborCountBuffer {
            counts: vec![0; universe],
            touched: Vec::with_capacity(universe),
        }
    }

    #[inline]
    fn incr(&mut self, v: VertexId) {
        if self.counts[v as usize] == 0 {
            self.touched.push(v);
        }
        self.counts[v as usize] += 1;
    }

    #[inline]
    pub fn get(&self, v: VertexId) -> u32 {
        self.counts[v as usize]
    }

    pub fn touched(&self) -> &[VertexId] {
        &self.touched
    }

    fn reset(&mut self) {
        for i in 0..self.touched.len() {
            self.counts[self.touched[i] as usize] = 0;
        }
        self.touched.clear();
    }

    fn element_slots(&self) -> usize {
        self.counts.len() + self.touched.capacity()
    }
}

struct Frame {
    /// Early-stop state: the count of the last candidate selected at this
    /// level; selections within one level are non-decreasing in count.
    last_min: u32,
    /// Candidate whose child subtree is currently open below this level.
    pending: Option<VertexId>,
}

/// The per-worker search state: the four set views plus per-level
/// bookkeeping replacing a call stack. Allocation happens once per worker;
/// loading a task reuses the same storage.
pub struct SearchState {
    p: CompactArray,
    r: CompactArray,
    l: CompactArray,
    q: RetiredSet,
    counts: NeighborCountBuffer,
    frames: Vec<Frame>,
    base_level: u32,
}

impl SearchState {
    pub fn new_for(g: &BipartiteGraph) -> SearchState {
        SearchState {
            p: CompactArray::new(g.n_u(), Direction::Shrinking),
            r: CompactArray::new(g.n_u(), Direction::Growing),
            l: CompactArray::new(g.n_v(), Direction::Shrinking),
            q: RetiredSet::new(g.n_u()),
            counts: NeighborCountBuffer::new(g.n_u()),
            frames: vec![Frame {
                last_min: 0,
                pending: None,
            }],
            base_level: 0,
        }
    }

    /// Full root state: `P` holds every candidate-side vertex with at least
    /// one edge, `L` the whole other side, `R` and `Q` are empty.
    pub fn init_root(&mut self, g: &BipartiteGraph) {
        self.p
            .reset_active((0..g.n_u() as VertexId).filter(|&u| g.degree(Side::U, u) > 0));
        self.l.reset_full();
        self.r.reset_active(std::iter::empty());
        self.q.reset(std::iter::empty());
        self.reset_frames(0);
    }

    /// Loads the state a claimed task runs in: the victim's (or root's)
    /// `L`/`R` at `level`, the remaining candidates, and the retired set.
    /// The task's own candidate must not be included in `p`.
    pub fn load_frame(
        &mut self,
        level: u32,
        l: impl IntoIterator<Item = VertexId>,
        r: impl IntoIterator<Item = VertexId>,
        p: impl IntoIterator<Item = VertexId>,
        q: impl IntoIterator<Item = VertexId>,
    ) {
        self.l.reset_active(l);
        self.r.reset_active(r);
        self.p.reset_active(p);
        self.q.reset(q);
        self.reset_frames(level);
    }

    /// Same as [`Self::load_frame`] with the whole other side as `L`,
    /// avoiding a per-task copy proportional to `n_v`.
    pub fn load_root_frame(
        &mut self,
        p: impl IntoIterator<Item = VertexId>,
        q: impl IntoIterator<Item = VertexId>,
    ) {
        self.l.reset_full();
        self.r.reset_active(std::iter::empty());
        self.p.reset_active(p);
        self.q.reset(q);
        self.reset_frames(0);
    }

    fn reset_frames(&mut self, level: u32) {
        self.frames.clear();
        self.frames.push(Frame {
            last_min: 0,
            pending: None,
        });
        self.base_level = level;
    }

    /// Depth of the current frame relative to the loaded base.
    fn rel_depth(&self) -> usize {
        self.frames.len() - 1
    }

    /// Absolute level of the current frame (base level plus descent depth).
    pub fn current_level(&self) -> u32 {
        self.base_level + self.rel_depth() as u32
    }

    /// Remaining candidates at the current level, in arbitrary order.
    pub fn candidates(&self) -> &[VertexId] {
        self.p.active()
    }

    pub fn left(&self) -> &[VertexId] {
        self.l.active()
    }

    pub fn right(&self) -> &[VertexId] {
        self.r.active()
    }

    pub fn retired(&self) -> &[VertexId] {
        self.q.members()
    }

    /// Computes `|N(v) ∩ L|` for a candidate against the current `L`.
    pub fn count_against_l(&self, g: &BipartiteGraph, v: VertexId) -> u32 {
        g.neighbors(Side::U, v)
            .iter()
            .filter(|&&u| self.l.contains(u))
            .count() as u32
    }

    /// Empties the current level's candidate set; used after its contents
    /// have been published for stealing.
    pub fn clear_candidates(&mut self) {
        self.p.clear_active();
    }

    /// Total vertex-ID storage slots held by this state. Fixed at
    /// construction: no engine operation grows it, whatever the search depth.
    pub fn element_slots(&self) -> usize {
        2 * self.p.universe_size()
            + 2 * self.r.universe_size()
            + 2 * self.l.universe_size()
            + self.q.element_slots()
            + self.counts.element_slots()
    }
}

#[derive(PartialEq)]
enum Step {
    /// The candidate opened a child level; the search is now one level deeper.
    Descended,
    /// The candidate's branch is finished (rejected, empty `L'`, or a leaf).
    Completed,
}

struct Search<'a, S: BicliqueSink, H: StealHook + ?Sized> {
    g: &'a BipartiteGraph,
    state: &'a mut SearchState,
    sink: &'a mut S,
    timer: &'a mut PhaseTimer,
    hook: &'a mut H,
    opts: EngineOptions,
}

impl<'a, S: BicliqueSink, H: StealHook + ?Sized> Search<'a, S, H> {
    /// Candidate selection with two early stops: returns the active vertex
    /// minimizing `|N(v) ∩ L|` (ties to the smallest ID), except that any
    /// vertex whose full count equals the previous selection's count is
    /// returned immediately — no candidate can beat it, since counts within
    /// one level are bounded below by the last selected minimum.
    fn select_candidate(&self) -> Option<(VertexId, u32)> {
        let st = &self.state;
        let last_min = st.frames.last().unwrap().last_min;
        let mut best: Option<(u32, VertexId)> = None;
        'candidates: for &v in st.p.active() {
            let mut cnt = 0u32;
            for &u in self.g.neighbors(Side::U, v) {
                if st.l.contains(u) {
                    cnt += 1;
                    if let Some((best_cnt, _)) = best {
                        if cnt > best_cnt {
                            continue 'candidates; // early stop 1
                        }
                    }
                }
            }
            if cnt == last_min {
                return Some((v, cnt)); // early stop 2
            }
            best = match best {
                Some((c, id)) if (c, id) <= (cnt, v) => Some((c, id)),
                _ => Some((cnt, v)),
            };
        }
        best.map(|(cnt, v)| (v, cnt))
    }

    /// Runs one branch for `x`, which the caller already removed from the
    /// current `P`. On `Descended` the child level is left open.
    fn process_candidate(&mut self, x: VertexId) -> Step {
        let st = &mut *self.state;
        self.timer.switch_to(Phase::LConstruction);
        st.p.enter_level();
        st.r.enter_level();
        st.l.enter_level();
        st.r.add_active(x);
        let l_len = st.l.retain_active(self.g.neighbors(Side::U, x).iter().copied());
        if l_len == 0 {
            // Degenerate branch: a biclique with an empty side is not
            // emitted and cannot have maximal extensions.
            Self::undo_descent(st);
            return Step::Completed;
        }

        self.timer.switch_to(Phase::MaximalityChecking);
        // Reverse scan: iterate L' adjacency once instead of walking the
        // neighbor list of every P/Q vertex.
        for &u in st.l.active() {
            for &v in self.g.neighbors(Side::V, u) {
                if st.p.contains(v) || st.q.contains(v) {
                    st.counts.incr(v);
                }
            }
        }
        if self.opts.debug_checks {
            Self::verify_counts(self.g, st);
        }
        // A retired vertex fully connected to L' means (L', R') was reachable
        // through an earlier branch; untouched members have count zero and
        // cannot match l_len >= 1.
        for &qv in st.counts.touched() {
            if st.q.contains(qv) && st.counts.get(qv) as usize == l_len {
                st.counts.reset();
                Self::undo_descent(st);
                return Step::Completed;
            }
        }
        {
            let counts = &st.counts;
            st.q.descend(|v| counts.get(v) > 0);
        }

        self.timer.switch_to(Phase::MaximalExpansion);
        let mut i = 0;
        while i < st.p.len() {
            let v = st.p.active()[i];
            let c = st.counts.get(v) as usize;
            if c == l_len {
                st.p.remove_active(v);
                st.r.add_active(v);
            } else if c == 0 {
                st.p.remove_active(v);
            } else {
                i += 1;
            }
        }
        st.counts.reset();
        self.sink.emit(st.l.active(), st.r.active());
        if self.opts.debug_checks {
            Self::verify_emission(self.g, st);
        }
        if st.p.is_empty() {
            st.q.ascend();
            Self::undo_descent(st);
            return Step::Completed;
        }
        st.frames.last_mut().unwrap().pending = Some(x);
        st.frames.push(Frame {
            last_min: 0,
            pending: None,
        });
        Step::Descended
    }

    fn undo_descent(st: &mut SearchState) {
        st.p.exit_level();
        st.r.exit_level();
        st.l.exit_level();
    }

    /// Closes the current level and retires the parent's pending candidate.
    fn ascend_and_retire(&mut self) {
        let st = &mut *self.state;
        Self::undo_descent(st);
        st.q.ascend();
        st.frames.pop();
        let x = st.frames.last_mut().unwrap().pending.take().unwrap();
        st.q.insert(x);
    }

    /// Depth-first loop without recursion; drives the current level and all
    /// levels below it until the search returns to `stop_depth`.
    fn run_loop(&mut self, stop_depth: usize) {
        loop {
            self.timer.switch_to(Phase::WorkStealing);
            self.hook.on_iteration(self.state, self.g, self.timer);
            self.timer.switch_to(Phase::CandidateSelection);
            match self.select_candidate() {
                Some((x, cnt)) => {
                    let frame = self.state.frames.last_mut().unwrap();
                    debug_assert!(cnt >= frame.last_min, "selection counts must not decrease");
                    frame.last_min = cnt;
                    self.state.p.remove_active(x);
                    if self.process_candidate(x) == Step::Completed {
                        self.state.q.insert(x);
                    }
                }
                None => {
                    if self.state.rel_depth() == stop_depth {
                        return;
                    }
                    self.ascend_and_retire();
                }
            }
        }
    }

    /// Forward recomputation of the reverse-scan postcondition:
    /// `counts[v] == |N(v) ∩ L'|` for every v in P ∪ Q.
    fn verify_counts(g: &BipartiteGraph, st: &SearchState) {
        for &v in st.p.active().iter().chain(st.q.members()) {
            let forward = g
                .neighbors(Side::U, v)
                .iter()
                .filter(|&&u| st.l.contains(u))
                .count() as u32;
            assert_eq!(
                st.counts.get(v),
                forward,
                "reverse scan disagrees with forward intersection for vertex {v}"
            );
        }
    }

    /// Mutual-closure check of an emission against the whole graph:
    /// `L' == N(R')` and `R' == N(L')`.
    fn verify_emission(g: &BipartiteGraph, st: &SearchState) {
        let mut left: Vec<VertexId> = st.l.active().to_vec();
        let mut right: Vec<VertexId> = st.r.active().to_vec();
        left.sort_unstable();
        right.sort_unstable();
        let mut l_closed: Vec<VertexId> = (0..g.n_v() as VertexId).collect();
        for &r in &right {
            let nbrs = g.neighbors(Side::U, r);
            l_closed.retain(|v| nbrs.binary_search(v).is_ok());
        }
        assert_eq!(left, l_closed, "emitted L' is not the closure of R'");
        let r_closed: Vec<VertexId> = (0..g.n_u() as VertexId)
            .filter(|&u| {
                let nbrs = g.neighbors(Side::U, u);
                left.iter().all(|v| nbrs.binary_search(v).is_ok())
            })
            .collect();
        assert_eq!(right, r_closed, "emitted R' is not the closure of L'");
    }
}

/// Complete enumeration from a full root state ([`SearchState::init_root`]).
pub fn run_full<S: BicliqueSink, H: StealHook + ?Sized>(
    state: &mut SearchState,
    g: &BipartiteGraph,
    sink: &mut S,
    timer: &mut PhaseTimer,
    hook: &mut H,
    opts: EngineOptions,
) {
    let mut search = Search {
        g,
        state,
        sink,
        timer,
        hook,
        opts,
    };
    search.run_loop(0);
    search.timer.switch_to(Phase::Other);
}

/// Runs exactly one claimed task: the branch of `forced` at the loaded frame
/// plus its whole subtree. The frame's remaining candidates serve only as
/// expansion context; they belong to other claims and are not iterated.
pub fn run_task<S: BicliqueSink, H: StealHook + ?Sized>(
    state: &mut SearchState,
    g: &BipartiteGraph,
    forced: VertexId,
    sink: &mut S,
    timer: &mut PhaseTimer,
    hook: &mut H,
    opts: EngineOptions,
) {
    let mut search = Search {
        g,
        state,
        sink,
        timer,
        hook,
        opts,
    };
    if search.process_candidate(forced) == Step::Descended {
        search.run_loop(1);
    }
    search.timer.switch_to(Phase::Other);
}
