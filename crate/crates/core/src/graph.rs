//! Immutable bipartite graphs in compressed sorted-adjacency form.
//!
//! Both sides get a CSR-style offset + flat target array so that workers can
//! iterate neighbor lists without locks or allocation. Input vertex labels
//! are remapped to dense 0-based IDs (sorted by original label, so loading
//! the same edge list in any line order produces the same graph); the
//! original labels are kept for emission.

use std::io::BufRead;

use thiserror::Error;

/// Dense internal vertex identifier, valid within one side of one graph.
pub type VertexId = u32;

/// Which side of the bipartition a vertex ID refers to.
///
/// After normalization `U` is the candidate side (the side `R`, `P`, `Q`
/// draw from) and `|U| <= |V|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    U,
    V,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: expected two integer endpoints, got {token:?}")]
    Parse { line: usize, token: String },
    #[error("line {line}: vertex index {value} below minimum {base} for the chosen base")]
    Index { line: usize, value: i64, base: i64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Options for [`BipartiteGraph::load_edge_list`].
#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Require vertex indices >= 1 (KONECT convention). Indices are densely
    /// remapped either way; this only affects validation.
    pub one_based: bool,
    /// Skip lines starting with `%` or `#`.
    pub allow_comments: bool,
    /// Skip the first non-comment line (a `|E| |U| |V|`-style header).
    pub header: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            one_based: false,
            allow_comments: true,
            header: false,
        }
    }
}

#[derive(Debug)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl Csr {
    fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    /// Builds a CSR from deduplicated edges; `targets` end up sorted per row.
    fn build(n: usize, edges: impl Iterator<Item = (VertexId, VertexId)> + Clone) -> Csr {
        let mut offsets = vec![0usize; n + 1];
        for (s, _) in edges.clone() {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut targets = vec![0; offsets[n]];
        let mut cursor = offsets.clone();
        for (s, t) in edges {
            targets[cursor[s as usize]] = t;
            cursor[s as usize] += 1;
        }
        for v in 0..n {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Csr { offsets, targets }
    }
}

/// Immutable bipartite graph. Construction is single-threaded; afterwards the
/// structure is safe for unrestricted concurrent reads.
#[derive(Debug)]
pub struct BipartiteGraph {
    n_u: usize,
    n_v: usize,
    adj_u: Csr,
    adj_v: Csr,
    swapped: bool,
    u_labels: Vec<i64>,
    v_labels: Vec<i64>,
}

impl BipartiteGraph {
    /// Parses a whitespace-separated `u v` edge list. Tokens beyond the first
    /// two on a line (weights, timestamps) are ignored. Duplicate edges
    /// collapse to one; vertex labels are remapped densely per side. The
    /// result is side-normalized (`n_u <= n_v`).
    pub fn load_edge_list<R: BufRead>(
        source: R,
        options: LoadOptions,
    ) -> Result<BipartiteGraph, GraphError> {
        let base: i64 = if options.one_based { 1 } else { 0 };
        let mut pairs: Vec<(i64, i64)> = Vec::new();
        let mut header_pending = options.header;
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if options.allow_comments && (trimmed.starts_with('%') || trimmed.starts_with('#')) {
                continue;
            }
            if header_pending {
                // Self-describing header lines are ignored rather than validated.
                header_pending = false;
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let mut endpoint = |_which: &str| -> Result<i64, GraphError> {
                let tok = tokens.next().ok_or_else(|| GraphError::Parse {
                    line: line_no,
                    token: trimmed.to_string(),
                })?;
                let value: i64 = tok.parse().map_err(|_| GraphError::Parse {
                    line: line_no,
                    token: tok.to_string(),
                })?;
                if value < base {
                    return Err(GraphError::Index {
                        line: line_no,
                        value,
                        base,
                    });
                }
                Ok(value)
            };
            let u = endpoint("u")?;
            let v = endpoint("v")?;
            pairs.push((u, v));
        }
        Ok(normalize_sides(Self::from_labeled_pairs(&pairs)))
    }

    /// Builds an unnormalized graph from labeled edges. Labels are remapped
    /// densely per side in sorted label order.
    fn from_labeled_pairs(pairs: &[(i64, i64)]) -> BipartiteGraph {
        let mut u_labels: Vec<i64> = pairs.iter().map(|&(u, _)| u).collect();
        let mut v_labels: Vec<i64> = pairs.iter().map(|&(_, v)| v).collect();
        u_labels.sort_unstable();
        u_labels.dedup();
        v_labels.sort_unstable();
        v_labels.dedup();
        let lookup = |labels: &[i64], x: i64| labels.binary_search(&x).unwrap() as VertexId;
        let mut edges: Vec<(VertexId, VertexId)> = pairs
            .iter()
            .map(|&(u, v)| (lookup(&u_labels, u), lookup(&v_labels, v)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Self::assemble(u_labels, v_labels, edges)
    }

    /// Builds an unnormalized graph from dense edge pairs; labels become the
    /// identity. Panics on out-of-range endpoints.
    pub fn from_edges_raw(n_u: usize, n_v: usize, edges: &[(VertexId, VertexId)]) -> BipartiteGraph {
        for &(u, v) in edges {
            assert!((u as usize) < n_u, "u endpoint {u} out of range for n_u={n_u}");
            assert!((v as usize) < n_v, "v endpoint {v} out of range for n_v={n_v}");
        }
        let mut edges = edges.to_vec();
        edges.sort_unstable();
        edges.dedup();
        let u_labels = (0..n_u as i64).collect();
        let v_labels = (0..n_v as i64).collect();
        Self::assemble(u_labels, v_labels, edges)
    }

    /// [`Self::from_edges_raw`] followed by side normalization.
    pub fn from_edges(n_u: usize, n_v: usize, edges: &[(VertexId, VertexId)]) -> BipartiteGraph {
        normalize_sides(Self::from_edges_raw(n_u, n_v, edges))
    }

    fn assemble(
        u_labels: Vec<i64>,
        v_labels: Vec<i64>,
        edges: Vec<(VertexId, VertexId)>,
    ) -> BipartiteGraph {
        let n_u = u_labels.len();
        let n_v = v_labels.len();
        let adj_u = Csr::build(n_u, edges.iter().copied());
        let adj_v = Csr::build(n_v, edges.iter().map(|&(u, v)| (v, u)));
        BipartiteGraph {
            n_u,
            n_v,
            adj_u,
            adj_v,
            swapped: false,
            u_labels,
            v_labels,
        }
    }

    /// Candidate-side vertex count.
    pub fn n_u(&self) -> usize {
        self.n_u
    }

    /// Other-side vertex count.
    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn edge_count(&self) -> usize {
        self.adj_u.targets.len()
    }

    /// Whether normalization exchanged the input sides.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    /// Sorted neighbor list of `v` on the given side.
    pub fn neighbors(&self, side: Side, v: VertexId) -> &[VertexId] {
        match side {
            Side::U => self.adj_u.neighbors(v),
            Side::V => self.adj_v.neighbors(v),
        }
    }

    pub fn degree(&self, side: Side, v: VertexId) -> usize {
        self.neighbors(side, v).len()
    }

    /// Original input label of an internal ID.
    pub fn original_id(&self, side: Side, v: VertexId) -> i64 {
        match side {
            Side::U => self.u_labels[v as usize],
            Side::V => self.v_labels[v as usize],
        }
    }

    /// Checks the mutual-consistency invariants; used by tests.
    pub fn validate(&self) -> Result<(), String> {
        if self.n_u > self.n_v {
            return Err(format!("n_u={} > n_v={}", self.n_u, self.n_v));
        }
        let mut from_u: Vec<(VertexId, VertexId)> = Vec::new();
        for u in 0..self.n_u as VertexId {
            let nbrs = self.adj_u.neighbors(u);
            if !nbrs.windows(2).all(|w| w[0] < w[1]) {
                return Err(format!("adj_u[{u}] not strictly increasing"));
            }
            from_u.extend(nbrs.iter().map(|&v| (u, v)));
        }
        let mut from_v: Vec<(VertexId, VertexId)> = Vec::new();
        for v in 0..self.n_v as VertexId {
            let nbrs = self.adj_v.neighbors(v);
            if !nbrs.windows(2).all(|w| w[0] < w[1]) {
                return Err(format!("adj_v[{v}] not strictly increasing"));
            }
            from_v.extend(nbrs.iter().map(|&u| (u, v)));
        }
        from_u.sort_unstable();
        from_v.sort_unstable();
        if from_u != from_v {
            return Err("adj_u and adj_v disagree on the edge set".to_string());
        }
        Ok(())
    }
}

/// Exchanges sides if needed so that the candidate side is the smaller one
/// (`n_u <= n_v`); ties keep the input orientation.
pub fn normalize_sides(raw: BipartiteGraph) -> BipartiteGraph {
    if raw.n_u <= raw.n_v {
        return raw;
    }
    BipartiteGraph {
        n_u: raw.n_v,
        n_v: raw.n_u,
        adj_u: raw.adj_v,
        adj_v: raw.adj_u,
        swapped: !raw.swapped,
        u_labels: raw.v_labels,
        v_labels: raw.u_labels,
    }
}
