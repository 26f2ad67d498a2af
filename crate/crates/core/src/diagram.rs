//! Ordered Bratteli diagrams: construction, validation, telescoping and
//! incidence matrices.
//!
//! Vertices and edges are identified positionally. Level `n` edges (`E_n`)
//! run from `V_{n-1}` to `V_n`; level 0 holds the root. Infinite diagrams are
//! encoded either as a finite prefix followed by one repeating level block
//! (`Growth::Stationary`) or, for the single-vertex diagrams used by
//! extension constructions, by a closed-form edge count
//! (`Growth::Odometer`, with `base^n + extra` edges at level `n`).

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg;

/// Vertex `index` of `V_level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub level: usize,
    pub index: usize,
}

/// Edge `index` of `E_level` (`level >= 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId {
    pub level: usize,
    pub index: usize,
}

/// One edge of a level: source in `V_{n-1}`, target in `V_n`, and its order
/// rank among the edges sharing its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub rank: usize,
}

impl Edge {
    pub fn new(source: usize, target: usize, rank: usize) -> Self {
        Edge { source, target, rank }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    /// Only the explicit levels exist.
    Finite,
    /// Levels `>= from` repeat the explicit level `from`.
    Stationary { from: usize },
    /// One vertex per level and `base^n + extra` edges at level `n`, ranked by index.
    Odometer { base: u64, extra: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BratteliDiagram {
    vertex_counts: Vec<usize>,
    levels: Vec<Vec<Edge>>,
    growth: Growth,
    // per explicit level, per target vertex: edge indices sorted by rank
    in_order: Vec<Vec<Vec<usize>>>,
}

/// `A[w][v]` counts the level-`level` edges from `v` to `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    pub level: usize,
    pub entries: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    RootCount(usize),
    EmptyLevel(usize),
    EdgeEndpoint { edge: EdgeId, detail: String },
    NoOutgoing(VertexId),
    NoIncoming(VertexId),
    RankSet { vertex: VertexId, ranks: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RootCount(c) => write!(f, "level 0 has {c} vertices, expected 1"),
            Violation::EmptyLevel(n) => write!(f, "level {n} has no vertices"),
            Violation::EdgeEndpoint { edge, detail } => {
                write!(f, "edge {}:{} {}", edge.level, edge.index, detail)
            }
            Violation::NoOutgoing(v) => write!(f, "vertex {}:{} has no outgoing edge", v.level, v.index),
            Violation::NoIncoming(v) => write!(f, "vertex {}:{} has no incoming edge", v.level, v.index),
            Violation::RankSet { vertex, ranks } => write!(
                f,
                "ranks into vertex {}:{} are {:?}, expected 0..{}",
                vertex.level,
                vertex.index,
                ranks,
                ranks.len()
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Which extremal edges a path follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extremal {
    Max,
    Min,
}

/// The unique infinite path of extremal edges in a stationary diagram:
/// `prefix` reaches the stationary level and `cycle` repeats from there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalPath {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderCheck {
    Yes { xmax: Vec<usize>, xmin: Vec<usize> },
    No { kind: Extremal, first: Vec<usize>, second: Vec<usize> },
    UnknownAtDepth,
}

impl BratteliDiagram {
    /// Builds a diagram from explicit levels. `stationary_from = Some(L)`
    /// makes levels beyond `L` copies of level `L`.
    pub fn new(
        vertex_counts: Vec<usize>,
        levels: Vec<Vec<Edge>>,
        stationary_from: Option<usize>,
    ) -> Result<Self> {
        if vertex_counts.len() != levels.len() + 1 {
            return Err(Error::MalformedDiagram(format!(
                "{} vertex counts for {} edge levels",
                vertex_counts.len(),
                levels.len()
            )));
        }
        let growth = match stationary_from {
            None => Growth::Finite,
            Some(from) => {
                if from == 0 || from != levels.len() {
                    return Err(Error::MalformedDiagram(format!(
                        "stationary_from {from} must equal the number of explicit levels {}",
                        levels.len()
                    )));
                }
                if vertex_counts[from - 1] != vertex_counts[from] {
                    return Err(Error::MalformedDiagram(format!(
                        "repeating level {from} must map {} vertices to the same number, found {}",
                        vertex_counts[from - 1],
                        vertex_counts[from]
                    )));
                }
                Growth::Stationary { from }
            }
        };
        let in_order = levels
            .iter()
            .enumerate()
            .map(|(i, edges)| {
                let mut by_target = vec![Vec::new(); vertex_counts[i + 1]];
                for (idx, e) in edges.iter().enumerate() {
                    if e.target < by_target.len() {
                        by_target[e.target].push(idx);
                    }
                }
                for list in &mut by_target {
                    list.sort_by_key(|&idx| (edges[idx].rank, idx));
                }
                by_target
            })
            .collect();
        let mut d = BratteliDiagram { vertex_counts, levels, growth, in_order };
        d.normalize();
        Ok(d)
    }

    /// Single-vertex diagram with `base^n + extra` edges at level `n`.
    pub fn odometer(base: u64, extra: u64) -> Result<Self> {
        if base < 2 {
            return Err(Error::MalformedDiagram("odometer base must be at least 2".into()));
        }
        Ok(BratteliDiagram {
            vertex_counts: vec![1],
            levels: Vec::new(),
            growth: Growth::Odometer { base, extra },
            in_order: Vec::new(),
        })
    }

    /// Shortens the explicit prefix of a stationary diagram while the level
    /// before the repeating block equals it.
    fn normalize(&mut self) {
        while let Growth::Stationary { from } = self.growth {
            if from < 2 {
                break;
            }
            let same_edges = self.levels[from - 2] == self.levels[from - 1];
            let same_counts = self.vertex_counts[from - 2] == self.vertex_counts[from - 1];
            if !(same_edges && same_counts) {
                break;
            }
            self.levels.pop();
            self.in_order.pop();
            self.vertex_counts.pop();
            self.growth = Growth::Stationary { from: from - 1 };
        }
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    /// Explicitly stored vertex counts (levels `0..=explicit_depth`).
    pub fn vertex_counts(&self) -> &[usize] {
        &self.vertex_counts
    }

    /// Explicitly stored edge levels (`levels()[n-1]` is `E_n`).
    pub fn levels(&self) -> &[Vec<Edge>] {
        &self.levels
    }

    pub fn explicit_depth(&self) -> usize {
        self.levels.len()
    }

    pub fn stationary_from(&self) -> Option<usize> {
        match self.growth {
            Growth::Stationary { from } => Some(from),
            _ => None,
        }
    }

    /// `Some(depth)` for finite diagrams, `None` for infinite ones.
    pub fn depth(&self) -> Option<usize> {
        match self.growth {
            Growth::Finite => Some(self.levels.len()),
            _ => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.growth != Growth::Finite
    }

    fn explicit_index(&self, n: usize) -> Option<usize> {
        if n == 0 {
            return None;
        }
        match self.growth {
            Growth::Finite => (n <= self.levels.len()).then(|| n - 1),
            Growth::Stationary { from } => Some(n.min(from) - 1),
            Growth::Odometer { .. } => None,
        }
    }

    pub fn has_level(&self, n: usize) -> bool {
        match self.growth {
            Growth::Finite => n <= self.levels.len(),
            _ => true,
        }
    }

    pub fn check_level(&self, n: usize) -> Result<()> {
        if n == 0 || !self.has_level(n) {
            return Err(Error::LevelOutOfRange { level: n, depth: self.levels.len() });
        }
        Ok(())
    }

    pub fn vertex_count(&self, n: usize) -> usize {
        match self.growth {
            Growth::Finite => self.vertex_counts.get(n).copied().unwrap_or(0),
            Growth::Stationary { from } => self.vertex_counts[n.min(from)],
            Growth::Odometer { .. } => 1,
        }
    }

    /// Number of edges in `E_n`.
    ///
    /// # Panics
    /// For odometer growth when `base^n + extra` overflows `usize`.
    pub fn edge_count(&self, n: usize) -> usize {
        match self.growth {
            Growth::Odometer { base, extra } => odometer_count(base, extra, n)
                .unwrap_or_else(|| panic!("edge count at level {n} overflows")),
            _ => self.explicit_index(n).map_or(0, |i| self.levels[i].len()),
        }
    }

    /// Edge `i` of `E_n`.
    ///
    /// # Panics
    /// When `n` or `i` is out of range.
    pub fn edge(&self, n: usize, i: usize) -> Edge {
        match self.growth {
            Growth::Odometer { .. } => {
                assert!(i < self.edge_count(n), "edge {i} out of range at level {n}");
                Edge::new(0, 0, i)
            }
            _ => {
                let li = self.explicit_index(n).expect("level out of range");
                self.levels[li][i]
            }
        }
    }

    pub fn try_edge(&self, n: usize, i: usize) -> Result<Edge> {
        self.check_level(n)?;
        if i >= self.edge_count(n) {
            return Err(Error::InvalidPath(format!("edge {i} does not exist at level {n}")));
        }
        Ok(self.edge(n, i))
    }

    pub fn in_degree(&self, n: usize, w: usize) -> usize {
        match self.growth {
            Growth::Odometer { .. } => self.edge_count(n),
            _ => self
                .explicit_index(n)
                .and_then(|i| self.in_order[i].get(w))
                .map_or(0, |l| l.len()),
        }
    }

    /// Index of the edge of rank `r` into vertex `w` of `V_n`.
    pub fn in_edge_by_rank(&self, n: usize, w: usize, r: usize) -> Option<usize> {
        match self.growth {
            Growth::Odometer { .. } => (w == 0 && r < self.edge_count(n)).then_some(r),
            _ => self
                .explicit_index(n)
                .and_then(|i| self.in_order[i].get(w))
                .and_then(|l| l.get(r).copied()),
        }
    }

    pub fn max_in_edge(&self, n: usize, w: usize) -> Option<usize> {
        let d = self.in_degree(n, w);
        if d == 0 {
            return None;
        }
        self.in_edge_by_rank(n, w, d - 1)
    }

    pub fn min_in_edge(&self, n: usize, w: usize) -> Option<usize> {
        self.in_edge_by_rank(n, w, 0)
    }

    pub fn extremal_in_edge(&self, kind: Extremal, n: usize, w: usize) -> Option<usize> {
        match kind {
            Extremal::Max => self.max_in_edge(n, w),
            Extremal::Min => self.min_in_edge(n, w),
        }
    }

    /// Position of edge `i` of `E_n` within the rank order into its target.
    pub fn position_in_order(&self, n: usize, i: usize) -> usize {
        match self.growth {
            Growth::Odometer { .. } => i,
            _ => {
                let li = self.explicit_index(n).expect("level out of range");
                let e = self.levels[li][i];
                self.in_order[li][e.target].iter().position(|&x| x == i).expect("edge listed")
            }
        }
    }

    pub fn is_max_edge(&self, n: usize, i: usize) -> bool {
        let e = self.edge(n, i);
        self.position_in_order(n, i) + 1 == self.in_degree(n, e.target)
    }

    pub fn is_min_edge(&self, n: usize, i: usize) -> bool {
        self.position_in_order(n, i) == 0
    }

    /// Indices of edges in `E_n` whose source is vertex `v` of `V_{n-1}`.
    pub fn out_edges(&self, n: usize, v: usize) -> Vec<usize> {
        match self.growth {
            Growth::Odometer { .. } => {
                if v == 0 {
                    (0..self.edge_count(n)).collect()
                } else {
                    Vec::new()
                }
            }
            _ => match self.explicit_index(n) {
                Some(li) => self.levels[li]
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.source == v)
                    .map(|(i, _)| i)
                    .collect(),
                None => Vec::new(),
            },
        }
    }

    /// Edge list of `E_n`, materialized.
    pub fn level_edges(&self, n: usize) -> Result<Vec<Edge>> {
        self.check_level(n)?;
        Ok((0..self.edge_count(n)).map(|i| self.edge(n, i)).collect())
    }

    /// Lists every violated axiom; empty iff the diagram is valid.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.vertex_counts[0] != 1 {
            violations.push(Violation::RootCount(self.vertex_counts[0]));
        }
        if let Growth::Odometer { .. } = self.growth {
            return ValidationReport { violations };
        }
        for (n, &c) in self.vertex_counts.iter().enumerate().skip(1) {
            if c == 0 {
                violations.push(Violation::EmptyLevel(n));
            }
        }
        let explicit = self.levels.len();
        for n in 1..=explicit {
            let src_count = self.vertex_counts[n - 1];
            let tgt_count = self.vertex_counts[n];
            for (i, e) in self.levels[n - 1].iter().enumerate() {
                if e.source >= src_count {
                    violations.push(Violation::EdgeEndpoint {
                        edge: EdgeId { level: n, index: i },
                        detail: format!("source {} outside level {} ({} vertices)", e.source, n - 1, src_count),
                    });
                }
                if e.target >= tgt_count {
                    violations.push(Violation::EdgeEndpoint {
                        edge: EdgeId { level: n, index: i },
                        detail: format!("target {} outside level {} ({} vertices)", e.target, n, tgt_count),
                    });
                }
            }
            for w in 0..tgt_count {
                let ranks: Vec<usize> = self.levels[n - 1]
                    .iter()
                    .filter(|e| e.target == w)
                    .map(|e| e.rank)
                    .collect();
                if ranks.is_empty() {
                    violations.push(Violation::NoIncoming(VertexId { level: n, index: w }));
                    continue;
                }
                let mut sorted = ranks.clone();
                sorted.sort_unstable();
                if sorted.iter().enumerate().any(|(i, &r)| i != r) {
                    violations.push(Violation::RankSet { vertex: VertexId { level: n, index: w }, ranks });
                }
            }
        }
        // outgoing edges: every vertex below the last level, plus the last
        // level of a stationary diagram (its outgoing edges are the block's)
        let last_checked = match self.growth {
            Growth::Stationary { from } => from,
            _ => explicit.saturating_sub(1),
        };
        for n in 0..=last_checked.min(self.vertex_counts.len() - 1) {
            let next = (n + 1).min(explicit);
            if next == 0 {
                break;
            }
            for v in 0..self.vertex_counts[n] {
                if !self.levels[next - 1].iter().any(|e| e.source == v) {
                    violations.push(Violation::NoOutgoing(VertexId { level: n, index: v }));
                }
            }
        }
        ValidationReport { violations }
    }

    /// True iff consecutive levels up to `depth` are joined by all vertex pairs.
    pub fn has_full_edge_connections(&self, depth: usize) -> bool {
        if let Growth::Odometer { .. } = self.growth {
            return true;
        }
        let top = match self.growth {
            Growth::Stationary { from } => depth.min(from),
            _ => depth.min(self.levels.len()),
        };
        (1..=top).all(|n| {
            let edges = &self.levels[n - 1];
            (0..self.vertex_counts[n - 1]).all(|v| {
                (0..self.vertex_counts[n]).all(|w| edges.iter().any(|e| e.source == v && e.target == w))
            })
        })
    }

    pub fn incidence_matrix(&self, n: usize) -> Result<IncidenceMatrix> {
        self.check_level(n)?;
        let rows = self.vertex_count(n);
        let cols = self.vertex_count(n - 1);
        let mut entries = vec![vec![0u64; cols]; rows];
        match self.growth {
            Growth::Odometer { .. } => entries[0][0] = self.edge_count(n) as u64,
            _ => {
                let li = self.explicit_index(n).expect("checked level");
                for e in &self.levels[li] {
                    if e.target < rows && e.source < cols {
                        entries[e.target][e.source] += 1;
                    }
                }
            }
        }
        Ok(IncidenceMatrix { level: n, entries })
    }

    /// Finite path of `kind`-extremal edges from the root to vertex `v` of `V_n`.
    pub fn extremal_path_to(&self, kind: Extremal, n: usize, v: usize) -> Result<Vec<usize>> {
        if n > 0 {
            self.check_level(n)?;
        }
        let mut path = vec![0; n];
        let mut cur = v;
        for level in (1..=n).rev() {
            let e = self
                .extremal_in_edge(kind, level, cur)
                .ok_or_else(|| Error::InvalidPath(format!("vertex {level}:{cur} has no incoming edge")))?;
            path[level - 1] = e;
            cur = self.edge(level, e).source;
        }
        Ok(path)
    }

    /// The unique infinite path of extremal edges of a stationary diagram, if unique.
    pub fn extremal_path(&self, kind: Extremal) -> Option<ExtremalPath> {
        let Growth::Stationary { from } = self.growth else {
            return None;
        };
        let cyclic = self.block_cyclic_points(kind);
        if cyclic.len() != 1 {
            return None;
        }
        let u = cyclic[0];
        let prefix = self.extremal_path_to(kind, from, u).ok()?;
        let cycle = vec![*prefix.last()?];
        Some(ExtremalPath { prefix, cycle })
    }

    // cyclic points of v -> source(extremal in-edge of v) on the stationary block
    fn block_cyclic_points(&self, kind: Extremal) -> Vec<usize> {
        let Growth::Stationary { from } = self.growth else {
            return Vec::new();
        };
        let n = self.vertex_counts[from];
        let map: Vec<Option<usize>> = (0..n)
            .map(|v| self.extremal_in_edge(kind, from, v).map(|e| self.edge(from, e).source))
            .collect();
        let mut cyclic = BTreeSet::new();
        for start in 0..n {
            let mut cur = Some(start);
            for _ in 0..=n {
                cur = cur.and_then(|c| map[c]);
            }
            // after n steps we are on a cycle; walk it
            if let Some(c0) = cur {
                let mut c = c0;
                loop {
                    cyclic.insert(c);
                    match map[c] {
                        Some(nx) if nx != c0 => c = nx,
                        _ => break,
                    }
                }
            }
        }
        cyclic.into_iter().collect()
    }

    /// Decides whether the all-maximal and all-minimal paths are unique:
    /// exactly for stationary and odometer diagrams, else judged at `depth`.
    pub fn is_properly_ordered(&self, depth: usize) -> OrderCheck {
        match self.growth {
            Growth::Odometer { .. } => OrderCheck::Yes { xmax: Vec::new(), xmin: Vec::new() },
            Growth::Stationary { from } => {
                let mut found = Vec::new();
                for kind in [Extremal::Max, Extremal::Min] {
                    let cyclic = self.block_cyclic_points(kind);
                    if cyclic.len() != 1 {
                        let first = self.extremal_path_to(kind, from, cyclic[0]).unwrap_or_default();
                        let second = cyclic
                            .get(1)
                            .and_then(|&c| self.extremal_path_to(kind, from, c).ok())
                            .unwrap_or_default();
                        return OrderCheck::No { kind, first, second };
                    }
                    found.push(self.extremal_path_to(kind, from, cyclic[0]).unwrap_or_default());
                }
                let xmin = found.pop().unwrap_or_default();
                let xmax = found.pop().unwrap_or_default();
                OrderCheck::Yes { xmax, xmin }
            }
            Growth::Finite => {
                let d = depth.min(self.levels.len());
                let mut prefixes = Vec::new();
                for kind in [Extremal::Max, Extremal::Min] {
                    let mut reach: BTreeSet<usize> = (0..self.vertex_counts[d]).collect();
                    let mut by_level = vec![reach.clone()];
                    for level in (1..=d).rev() {
                        reach = reach
                            .iter()
                            .filter_map(|&v| self.extremal_in_edge(kind, level, v))
                            .map(|e| self.edge(level, e).source)
                            .collect();
                        by_level.push(reach.clone());
                    }
                    by_level.reverse(); // by_level[k] = reachable set at level k
                    if d == 0 || by_level[d - 1].len() == 1 {
                        let u = if d == 0 { 0 } else { *by_level[d - 1].iter().next().expect("nonempty") };
                        prefixes.push(self.extremal_path_to(kind, d.saturating_sub(1), u).unwrap_or_default());
                    } else if by_level[1].len() >= 2 {
                        let mut it = by_level[1].iter();
                        let a = *it.next().expect("two");
                        let b = *it.next().expect("two");
                        let first = self.extremal_path_to(kind, 1, a).unwrap_or_default();
                        let second = self.extremal_path_to(kind, 1, b).unwrap_or_default();
                        return OrderCheck::No { kind, first, second };
                    } else {
                        return OrderCheck::UnknownAtDepth;
                    }
                }
                let xmin = prefixes.pop().unwrap_or_default();
                let xmax = prefixes.pop().unwrap_or_default();
                OrderCheck::Yes { xmax, xmin }
            }
        }
    }

    /// Telescopes to the given cut levels. Returns the new diagram and, per
    /// new level, the chain of original edge indices behind each new edge.
    pub fn telescope_with_chains(&self, cuts: &[usize]) -> Result<(BratteliDiagram, Vec<Vec<Vec<usize>>>)> {
        if cuts.is_empty() {
            return Err(Error::InvalidCuts("no cut levels".into()));
        }
        if cuts[0] == 0 || cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCuts("cut levels must start after 0 and strictly increase".into()));
        }
        let last = *cuts.last().expect("nonempty");
        let stationary = match self.growth {
            Growth::Finite => {
                if last > self.levels.len() {
                    return Err(Error::InvalidCuts(format!(
                        "cut level {last} exceeds depth {}",
                        self.levels.len()
                    )));
                }
                false
            }
            Growth::Stationary { from } => {
                let prev = if cuts.len() >= 2 { cuts[cuts.len() - 2] } else { 0 };
                if prev + 1 < from {
                    return Err(Error::InvalidCuts(format!(
                        "the last two cuts must lie at or beyond level {} so the final block repeats",
                        from - 1
                    )));
                }
                true
            }
            Growth::Odometer { .. } => {
                return Err(Error::InvalidCuts("odometer diagrams cannot be telescoped into the stationary encoding".into()));
            }
        };
        let mut bounds = vec![0];
        bounds.extend_from_slice(cuts);
        let mut vertex_counts = vec![1];
        let mut levels = Vec::new();
        let mut chains_all = Vec::new();
        for w in bounds.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut chains: Vec<Vec<usize>> = Vec::new();
            for v in 0..self.vertex_count(a) {
                let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
                while let Some(partial) = stack.pop() {
                    let level = a + partial.len() + 1;
                    if level > b {
                        chains.push(partial);
                        continue;
                    }
                    let src = match partial.last() {
                        None => v,
                        Some(&e) => self.edge(level - 1, e).target,
                    };
                    let outs = self.out_edges(level, src);
                    for &e in outs.iter().rev() {
                        let mut next = partial.clone();
                        next.push(e);
                        stack.push(next);
                    }
                }
            }
            // new edge indices follow the lexicographic order of the chains
            chains.sort();
            let edges_meta: Vec<(usize, usize, Vec<usize>)> = chains
                .iter()
                .map(|c| {
                    let source = self.edge(a + 1, c[0]).source;
                    let target = self.edge(b, *c.last().expect("nonempty chain")).target;
                    // deepest edge most significant
                    let key = c
                        .iter()
                        .enumerate()
                        .rev()
                        .map(|(j, &e)| self.position_in_order(a + 1 + j, e))
                        .collect();
                    (source, target, key)
                })
                .collect();
            let targets = self.vertex_count(b);
            let mut ranks = vec![0; chains.len()];
            for t in 0..targets {
                let mut idx: Vec<usize> = (0..chains.len()).filter(|&i| edges_meta[i].1 == t).collect();
                idx.sort_by(|&x, &y| edges_meta[x].2.cmp(&edges_meta[y].2));
                for (r, i) in idx.into_iter().enumerate() {
                    ranks[i] = r;
                }
            }
            levels.push(
                edges_meta
                    .iter()
                    .zip(&ranks)
                    .map(|((s, t, _), &r)| Edge::new(*s, *t, r))
                    .collect(),
            );
            vertex_counts.push(targets);
            chains_all.push(chains);
        }
        let from = stationary.then_some(cuts.len());
        let d = BratteliDiagram::new(vertex_counts, levels, from)?;
        let keep = d.levels.len();
        chains_all.truncate(keep);
        Ok((d, chains_all))
    }

    /// Telescopes to the given cut levels. For stationary diagrams the last
    /// two cuts fix the period with which cutting continues.
    pub fn telescope(&self, cuts: &[usize]) -> Result<BratteliDiagram> {
        self.telescope_with_chains(cuts).map(|(d, _)| d)
    }

    /// Number of root paths ending at each vertex of `V_n`.
    pub fn path_counts(&self, n: usize) -> Result<Vec<num::BigInt>> {
        let mut v = vec![num::BigInt::from(1)];
        for level in 1..=n {
            let m = self.incidence_matrix(level)?;
            v = linalg::apply_int(&m.entries, &v);
        }
        Ok(v)
    }
}

fn odometer_count(base: u64, extra: u64, n: usize) -> Option<usize> {
    let p = base.checked_pow(u32::try_from(n).ok()?)?;
    usize::try_from(p.checked_add(extra)?).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn catalog_diagrams_are_valid() {
        assert!(catalog::two_infinity().validate().is_valid());
        assert!(catalog::k_infinity(3).validate().is_valid());
        assert!(catalog::fibonacci().validate().is_valid());
        assert!(catalog::figure_two().validate().is_valid());
        assert!(catalog::odometer_catalog(2).validate().is_valid());
        assert!(catalog::single_edge().validate().is_valid());
    }

    #[test]
    fn missing_incoming_edge_reported() {
        // level-2 vertex 1 receives nothing
        let d = BratteliDiagram::new(
            vec![1, 1, 2],
            vec![vec![Edge::new(0, 0, 0)], vec![Edge::new(0, 0, 0)]],
            None,
        )
        .unwrap();
        let r = d.validate();
        assert!(r.violations.contains(&Violation::NoIncoming(VertexId { level: 2, index: 1 })));
    }

    #[test]
    fn bad_ranks_reported() {
        let d = BratteliDiagram::new(vec![1, 1], vec![vec![Edge::new(0, 0, 0), Edge::new(0, 0, 0)]], Some(1)).unwrap();
        assert!(matches!(d.validate().violations[0], Violation::RankSet { .. }));
    }

    #[test]
    fn no_outgoing_reported() {
        let d = BratteliDiagram::new(
            vec![1, 2, 1],
            vec![
                vec![Edge::new(0, 0, 0), Edge::new(0, 1, 0)],
                vec![Edge::new(0, 0, 0)],
            ],
            None,
        )
        .unwrap();
        assert!(d.validate().violations.contains(&Violation::NoOutgoing(VertexId { level: 1, index: 1 })));
    }

    #[test]
    fn full_connections() {
        assert!(catalog::two_infinity().has_full_edge_connections(10));
        // vertex 1 never feeds vertex 1
        assert!(!catalog::fibonacci().has_full_edge_connections(10));
        assert!(catalog::k_infinity(3).has_full_edge_connections(10));
        assert!(!catalog::figure_two().has_full_edge_connections(3));
        let isolated = BratteliDiagram::new(
            vec![1, 2, 2],
            vec![
                vec![Edge::new(0, 0, 0), Edge::new(0, 1, 0)],
                vec![Edge::new(0, 0, 0), Edge::new(1, 1, 0)],
            ],
            None,
        )
        .unwrap();
        assert!(!isolated.has_full_edge_connections(2));
    }

    #[test]
    fn telescoping_counts() {
        let t = catalog::two_infinity().telescope(&[2, 4]).unwrap();
        assert_eq!(t.edge_count(1), 4);
        assert_eq!(t.edge_count(7), 4);
        assert_eq!(t.stationary_from(), Some(1));
        assert_eq!(t.incidence_matrix(1).unwrap().entries, vec![vec![4]]);
        assert!(t.validate().is_valid());
        let t3 = catalog::k_infinity(3).telescope(&[2, 4]).unwrap();
        assert_eq!(t3.edge_count(3), 9);
        let same = catalog::two_infinity().telescope(&[1]).unwrap();
        assert_eq!(same, catalog::two_infinity());
        let same2 = catalog::fibonacci().telescope(&[1, 2, 3]).unwrap();
        assert_eq!(same2, catalog::fibonacci());
    }

    #[test]
    fn telescoped_order_is_reverse_lexicographic() {
        // chains (e1, e2) in 2^inf: rank = 2*rank(e2) + rank(e1)
        let (t, chains) = catalog::two_infinity().telescope_with_chains(&[2, 4]).unwrap();
        for (i, c) in chains[0].iter().enumerate() {
            assert_eq!(t.edge(1, i).rank, 2 * c[1] + c[0]);
        }
    }

    #[test]
    fn telescope_errors() {
        let finite = catalog::two_infinity().telescope(&[1, 2, 3]).unwrap();
        assert!(BratteliDiagram::new(vec![1, 1], vec![vec![Edge::new(0, 0, 0)]], None)
            .unwrap()
            .telescope(&[2])
            .is_err());
        assert!(finite.telescope(&[0, 1]).is_err());
        assert!(catalog::two_infinity().telescope(&[2, 2]).is_err());
    }

    #[test]
    fn incidence_matrices() {
        assert_eq!(catalog::two_infinity().incidence_matrix(1).unwrap().entries, vec![vec![2]]);
        let f = catalog::fibonacci();
        assert_eq!(f.incidence_matrix(3).unwrap().entries, vec![vec![1, 1], vec![1, 0]]);
        assert!(f.incidence_matrix(0).is_err());
    }

    #[test]
    fn proper_order() {
        match catalog::two_infinity().is_properly_ordered(5) {
            OrderCheck::Yes { xmax, xmin } => {
                assert_eq!(xmax, vec![1]);
                assert_eq!(xmin, vec![0]);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(catalog::k_infinity(3).is_properly_ordered(5), OrderCheck::Yes { .. }));
        // two vertices, each receiving its maximal edge from itself
        let two = BratteliDiagram::new(
            vec![1, 2, 2],
            vec![
                vec![Edge::new(0, 0, 0), Edge::new(0, 1, 0)],
                vec![
                    Edge::new(0, 0, 1),
                    Edge::new(1, 0, 0),
                    Edge::new(1, 1, 1),
                    Edge::new(0, 1, 0),
                ],
            ],
            Some(2),
        )
        .unwrap();
        assert!(matches!(two.is_properly_ordered(5), OrderCheck::No { kind: Extremal::Max, .. }));
    }

    #[test]
    fn stationary_shape_errors() {
        assert!(BratteliDiagram::new(vec![1, 2], vec![vec![Edge::new(0, 0, 0), Edge::new(0, 1, 0)]], Some(1)).is_err());
        assert!(BratteliDiagram::new(vec![1, 1], vec![], None).is_err());
    }

    #[test]
    fn odometer_counts() {
        let d = catalog::odometer_catalog(1);
        assert_eq!(d.edge_count(1), 3);
        assert_eq!(d.edge_count(3), 9);
        assert_eq!(d.incidence_matrix(2).unwrap().entries, vec![vec![5]]);
    }
}
