//! Desk-scale correctness oracles: a closure-based brute-force enumerator and
//! a plain recursive reference search.
//!
//! Both are deliberately unoptimized and single-threaded so that a bug in the
//! engine's optimizations cannot mask itself. They agree with each other and
//! with the engine on every graph small enough to run them.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{BipartiteGraph, Side, VertexId};

/// Default candidate-side cap for [`closure_enumerate`].
pub const CLOSURE_SIDE_LIMIT: usize = 20;
/// Default candidate-side cap for [`reference_recursive_mbea`].
pub const REFERENCE_SIDE_LIMIT: usize = 5_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("candidate side has {size} vertices, above the limit {limit}")]
    SideTooLarge { size: usize, limit: usize },
}

/// Canonical set of maximal bicliques: sorted `(L, R)` ID pairs, both sides
/// nonempty, no duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BicliqueSet {
    set: BTreeSet<(Vec<VertexId>, Vec<VertexId>)>,
}

impl BicliqueSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a biclique, sorting both sides; returns false on a duplicate.
    pub fn insert(&mut self, mut left: Vec<VertexId>, mut right: Vec<VertexId>) -> bool {
        left.sort_unstable();
        right.sort_unstable();
        self.set.insert((left, right))
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Vec<VertexId>, Vec<VertexId>)> {
        self.set.iter()
    }

    /// Checks every element independently for mutual closure:
    /// `L == N(R)` and `R == N(L)` over the whole graph.
    pub fn check_mutual_closure(&self, g: &BipartiteGraph) -> Result<(), String> {
        for (left, right) in &self.set {
            if left.is_empty() || right.is_empty() {
                return Err(format!("empty side in ({left:?}, {right:?})"));
            }
            let l_closed = common_neighbors(g, Side::U, right);
            if &l_closed != left {
                return Err(format!("L != N(R) for ({left:?}, {right:?})"));
            }
            let r_closed = common_neighbors(g, Side::V, left);
            if &r_closed != right {
                return Err(format!("R != N(L) for ({left:?}, {right:?})"));
            }
        }
        Ok(())
    }
}

impl FromIterator<(Vec<VertexId>, Vec<VertexId>)> for BicliqueSet {
    fn from_iter<T: IntoIterator<Item = (Vec<VertexId>, Vec<VertexId>)>>(iter: T) -> Self {
        let mut s = BicliqueSet::new();
        for (l, r) in iter {
            s.insert(l, r);
        }
        s
    }
}

/// Common neighborhood of a set of `side`-vertices, as a sorted list.
/// `N(X) = intersection of N(x) for x in X`; empty `X` gives the full other
/// side.
fn common_neighbors(g: &BipartiteGraph, side: Side, xs: &[VertexId]) -> Vec<VertexId> {
    let other_count = match side {
        Side::U => g.n_v(),
        Side::V => g.n_u(),
    };
    let mut result: Vec<VertexId> = (0..other_count as VertexId).collect();
    for &x in xs {
        let nbrs = g.neighbors(side, x);
        result.retain(|v| nbrs.binary_search(v).is_ok());
        if result.is_empty() {
            break;
        }
    }
    result
}

/// Brute-force enumeration via the Galois closure: for every nonempty subset
/// `S` of the candidate side, `L = N(S)` and `R = N(L)` is a maximal biclique
/// whenever both sides are nonempty, and every maximal biclique arises this
/// way. Exponential in the candidate side; guarded by `subset_side_limit`.
pub fn closure_enumerate(
    g: &BipartiteGraph,
    subset_side_limit: usize,
) -> Result<BicliqueSet, OracleError> {
    let n = g.n_u();
    if n > subset_side_limit {
        return Err(OracleError::SideTooLarge {
            size: n,
            limit: subset_side_limit,
        });
    }
    let mut out = BicliqueSet::new();
    for mask in 1u64..(1u64 << n) {
        let subset: Vec<VertexId> = (0..n as VertexId).filter(|&u| mask >> u & 1 == 1).collect();
        let left = common_neighbors(g, Side::U, &subset);
        if left.is_empty() {
            continue;
        }
        let right = common_neighbors(g, Side::V, &left);
        if right.is_empty() {
            continue;
        }
        out.insert(left, right);
    }
    Ok(out)
}

/// Direct recursive transcription of the branch-and-bound search: plain set
/// copies per level, forward scans, input-order candidate popping, no compact
/// arrays, no early stops. Candidates with an empty `L'` are skipped without
/// emitting, matching the engine's rule.
pub fn reference_recursive_mbea(g: &BipartiteGraph) -> Result<BicliqueSet, OracleError> {
    reference_recursive_mbea_with_limit(g, REFERENCE_SIDE_LIMIT)
}

pub fn reference_recursive_mbea_with_limit(
    g: &BipartiteGraph,
    limit: usize,
) -> Result<BicliqueSet, OracleError> {
    if g.n_u() > limit {
        return Err(OracleError::SideTooLarge {
            size: g.n_u(),
            limit,
        });
    }
    let mut out = BicliqueSet::new();
    let l: Vec<VertexId> = (0..g.n_v() as VertexId).collect();
    let p: Vec<VertexId> = (0..g.n_u() as VertexId)
        .filter(|&u| g.degree(Side::U, u) > 0)
        .collect();
    recurse(g, &l, &[], p, Vec::new(), &mut out);
    Ok(out)
}

fn count_in(g: &BipartiteGraph, v: VertexId, l: &[VertexId]) -> usize {
    let nbrs = g.neighbors(Side::U, v);
    l.iter().filter(|u| nbrs.binary_search(u).is_ok()).count()
}

fn recurse(
    g: &BipartiteGraph,
    l: &[VertexId],
    r: &[VertexId],
    mut p: Vec<VertexId>,
    mut q: Vec<VertexId>,
    out: &mut BicliqueSet,
) {
    while !p.is_empty() {
        let x = p.remove(0);
        let x_nbrs = g.neighbors(Side::U, x);
        let l_next: Vec<VertexId> = l
            .iter()
            .copied()
            .filter(|v| x_nbrs.binary_search(v).is_ok())
            .collect();
        if !l_next.is_empty() {
            let mut maximal = true;
            let mut q_next = Vec::new();
            for &v in &q {
                let c = count_in(g, v, &l_next);
                if c == l_next.len() {
                    maximal = false;
                    break;
                } else if c > 0 {
                    q_next.push(v);
                }
            }
            if maximal {
                let mut r_next: Vec<VertexId> = r.to_vec();
                r_next.push(x);
                let mut p_next = Vec::new();
                for &v in &p {
                    let c = count_in(g, v, &l_next);
                    if c == l_next.len() {
                        r_next.push(v);
                    } else if c > 0 {
                        p_next.push(v);
                    }
                }
                out.insert(l_next.clone(), r_next.clone());
                if !p_next.is_empty() {
                    recurse(g, &l_next, &r_next, p_next, q_next, out);
                }
            }
        }
        q.push(x);
    }
}
