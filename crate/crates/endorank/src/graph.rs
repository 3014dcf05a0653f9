//! Core graph storage: members, skills, the undirected base network of
//! contacts, and per-skill weighted endorsement digraphs.
//!
//! Members are dense `0..n-1` indices; a skill is an index into an ordered
//! [`SkillSet`]. Endorsement digraphs keep their arcs in compressed
//! out-neighbor form sorted by target, which is the access pattern both power
//! iteration and deduction stream. Absent arcs mean weight zero and are never
//! stored; stored weights lie in `(0, 1]`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type MemberId = usize;
pub type SkillId = usize;

/// Ordered list of skill display names; a `SkillId` indexes into it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SkillSet(Vec<String>);

impl SkillSet {
    pub fn new(names: Vec<String>) -> Self {
        SkillSet(names)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn name(&self, skill: SkillId) -> &str {
        &self.0[skill]
    }

    pub fn index_of(&self, name: &str) -> Option<SkillId> {
        self.0.iter().position(|s| s == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("self-loop {0} -> {0}")]
    SelfLoop(MemberId),
    #[error("duplicate arc {0} -> {1}")]
    DuplicateArc(MemberId, MemberId),
    #[error("member {index} out of range (n = {n})")]
    OutOfRange { index: usize, n: usize },
    #[error("arc weight {0} outside (0, 1]")]
    BadWeight(f64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Undirected base network of contacts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberGraph {
    n: usize,
    adj: Vec<Vec<MemberId>>,
    edge_count: usize,
}

impl MemberGraph {
    /// Builds a graph from an edge list. Duplicate and reversed pairs collapse
    /// to a single edge; self-loops and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: &[(MemberId, MemberId)]) -> Result<Self, GraphError> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            for e in [u, v] {
                if e >= n {
                    return Err(GraphError::OutOfRange { index: e, n });
                }
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        norm.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &norm {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(MemberGraph {
            n,
            adj,
            edge_count: norm.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: MemberId) -> usize {
        self.adj[v].len()
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: MemberId) -> &[MemberId] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: MemberId, v: MemberId) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// All edges as `(u, v)` pairs with `u < v`, ascending.
    pub fn edges(&self) -> Vec<(MemberId, MemberId)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Number of nodes in the largest connected component.
    pub fn giant_component_size(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut best = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            best = best.max(size);
        }
        best
    }
}

/// Per-skill directed endorsement graph with arc weights in `(0, 1]`.
///
/// Arcs are stored row by row (source-major), each row sorted by target.
#[derive(Debug, Clone, PartialEq)]
pub struct EndorsementDigraph {
    n: usize,
    row_start: Vec<usize>,
    targets: Vec<MemberId>,
    weights: Vec<f64>,
}

impl EndorsementDigraph {
    /// Builds a digraph from an arc list. At most one arc per ordered pair;
    /// self-loops, out-of-range endpoints, and weights outside `(0, 1]` are
    /// rejected.
    pub fn new(n: usize, arcs: &[(MemberId, MemberId, f64)]) -> Result<Self, GraphError> {
        let mut sorted = arcs.to_vec();
        for &(u, v, w) in &sorted {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            for e in [u, v] {
                if e >= n {
                    return Err(GraphError::OutOfRange { index: e, n });
                }
            }
            if !w.is_finite() || w <= 0.0 || w > 1.0 {
                return Err(GraphError::BadWeight(w));
            }
        }
        sorted.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(GraphError::DuplicateArc(pair[0].0, pair[0].1));
            }
        }
        let mut row_start = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(sorted.len());
        let mut weights = Vec::with_capacity(sorted.len());
        row_start.push(0);
        let mut row = 0;
        for &(u, v, w) in &sorted {
            while row < u {
                row_start.push(targets.len());
                row += 1;
            }
            targets.push(v);
            weights.push(w);
        }
        while row < n {
            row_start.push(targets.len());
            row += 1;
        }
        debug_assert_eq!(row_start.len(), n + 1);
        Ok(EndorsementDigraph {
            n,
            row_start,
            targets,
            weights,
        })
    }

    /// Builds an unweighted digraph (every arc has weight 1).
    pub fn unweighted(n: usize, arcs: &[(MemberId, MemberId)]) -> Result<Self, GraphError> {
        let weighted: Vec<_> = arcs.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::new(n, &weighted)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    pub fn out_degree(&self, v: MemberId) -> usize {
        self.row_start[v + 1] - self.row_start[v]
    }

    /// Out-neighbors of `v` (targets ascending) and their weights.
    pub fn out_neighbors(&self, v: MemberId) -> (&[MemberId], &[f64]) {
        let lo = self.row_start[v];
        let hi = self.row_start[v + 1];
        (&self.targets[lo..hi], &self.weights[lo..hi])
    }

    /// Sum of the weights of all arcs leaving `v`; 0 if there are none.
    /// For an unweighted digraph this equals the out-degree.
    pub fn out_weight_sum(&self, v: MemberId) -> f64 {
        let (_, weights) = self.out_neighbors(v);
        weights.iter().sum()
    }

    pub fn has_arc(&self, u: MemberId, v: MemberId) -> bool {
        self.weight(u, v).is_some()
    }

    /// Weight of arc `u -> v`, or `None` when the arc is absent.
    pub fn weight(&self, u: MemberId, v: MemberId) -> Option<f64> {
        let (targets, weights) = self.out_neighbors(u);
        targets.binary_search(&v).ok().map(|i| weights[i])
    }

    /// All arcs as `(source, target, weight)`, source-major, targets ascending.
    pub fn arcs(&self) -> impl Iterator<Item = (MemberId, MemberId, f64)> + '_ {
        (0..self.n).flat_map(move |u| {
            let (targets, weights) = self.out_neighbors(u);
            targets
                .iter()
                .zip(weights)
                .map(move |(&v, &w)| (u, v, w))
        })
    }

    /// True when every stored arc has weight exactly 1.
    pub fn is_unweighted(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// In-degree of every member.
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &t in &self.targets {
            deg[t] += 1;
        }
        deg
    }

    /// Copy of the digraph padded with isolated members up to `new_n`.
    pub fn with_members(&self, new_n: usize) -> EndorsementDigraph {
        assert!(new_n >= self.n, "cannot shrink a digraph");
        let mut row_start = self.row_start.clone();
        row_start.resize(new_n + 1, self.targets.len());
        EndorsementDigraph {
            n: new_n,
            row_start,
            targets: self.targets.clone(),
            weights: self.weights.clone(),
        }
    }

    /// Copy restricted to the first `new_n` members, dropping every arc that
    /// touches a removed member.
    pub fn restricted_to(&self, new_n: usize) -> EndorsementDigraph {
        let arcs: Vec<_> = self
            .arcs()
            .filter(|&(u, v, _)| u < new_n && v < new_n)
            .collect();
        EndorsementDigraph::new(new_n, &arcs).expect("restriction preserves invariants")
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Iterates `(1-based line number, content)` with comments and blanks removed.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            None
        } else {
            Some((i + 1, content))
        }
    })
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    token: &str,
    what: &str,
) -> Result<T, GraphError> {
    token
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid {what} '{token}'")))
}

/// Loads an undirected member graph.
///
/// Format: the first non-comment line holds the member count `n`, each
/// following line one `u v` edge; `#` begins a comment. Duplicate and
/// reversed edge lines collapse to one edge.
pub fn load_member_graph<P: AsRef<Path>>(path: P) -> Result<MemberGraph, GraphError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = data_lines(&text);
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing member count"))?;
    if header.split_whitespace().count() != 1 {
        return Err(parse_err(path, header_line, "expected a lone member count"));
    }
    let n: usize = parse_field(path, header_line, header, "member count")?;
    let mut edges = Vec::new();
    for (line, content) in lines {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(parse_err(path, line, "expected 'u v'"));
        }
        let u: usize = parse_field(path, line, tokens[0], "member")?;
        let v: usize = parse_field(path, line, tokens[1], "member")?;
        if u == v {
            return Err(parse_err(path, line, format!("self-loop {u} -> {v}")));
        }
        if u >= n || v >= n {
            let bad = u.max(v);
            return Err(parse_err(path, line, format!("member {bad} out of range (n = {n})")));
        }
        edges.push((u, v));
    }
    MemberGraph::new(n, &edges)
}

/// Saves a member graph in the format accepted by [`load_member_graph`].
pub fn save_member_graph<P: AsRef<Path>>(path: P, graph: &MemberGraph) -> Result<(), GraphError> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{}", graph.n())?;
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Loads an endorsement digraph and checks it against the expected member
/// count `n`.
///
/// Format: first line `n`, then one `u v` or `u v w` arc per line with
/// `w` in `(0, 1]`; a missing weight means 1.
pub fn load_endorsement_digraph<P: AsRef<Path>>(
    path: P,
    n: usize,
) -> Result<EndorsementDigraph, GraphError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = data_lines(&text);
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing member count"))?;
    let declared: usize = parse_field(path, header_line, header, "member count")?;
    if declared != n {
        return Err(parse_err(
            path,
            header_line,
            format!("member count {declared} does not match expected {n}"),
        ));
    }
    let mut arcs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, content) in lines {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 && tokens.len() != 3 {
            return Err(parse_err(path, line, "expected 'u v' or 'u v w'"));
        }
        let u: usize = parse_field(path, line, tokens[0], "member")?;
        let v: usize = parse_field(path, line, tokens[1], "member")?;
        let w: f64 = if tokens.len() == 3 {
            parse_field(path, line, tokens[2], "weight")?
        } else {
            1.0
        };
        if u == v {
            return Err(parse_err(path, line, format!("self-loop {u} -> {v}")));
        }
        if u >= n || v >= n {
            let bad = u.max(v);
            return Err(parse_err(path, line, format!("member {bad} out of range (n = {n})")));
        }
        if !w.is_finite() || w <= 0.0 || w > 1.0 {
            return Err(parse_err(path, line, format!("weight {w} outside (0, 1]")));
        }
        if !seen.insert((u, v)) {
            return Err(parse_err(path, line, format!("duplicate arc {u} -> {v}")));
        }
        arcs.push((u, v, w));
    }
    EndorsementDigraph::new(n, &arcs)
}

/// Saves an endorsement digraph in the format accepted by
/// [`load_endorsement_digraph`]. Weight-1 arcs are written without the weight
/// column; other weights use the shortest decimal that round-trips exactly.
pub fn save_endorsement_digraph<P: AsRef<Path>>(
    path: P,
    digraph: &EndorsementDigraph,
) -> Result<(), GraphError> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{}", digraph.n())?;
    for (u, v, w) in digraph.arcs() {
        if w == 1.0 {
            writeln!(out, "{u} {v}")?;
        } else {
            writeln!(out, "{u} {v} {w}")?;
        }
    }
    out.flush()?;
    Ok(())
}
