//! Two disjoint embeddings of a lower diagram into an upper one sharing a
//! vertex map, and the two-point identification of infinite paths they
//! induce: a path whose edges eventually all come from one embedding is
//! glued to the path that follows the other embedding instead.
//!
//! Everything here works on stationary diagrams. Maps are given explicitly
//! up to a stable level and repeat from there on.

use std::collections::{HashMap, HashSet};

use num::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagram::{BratteliDiagram, Growth};
use crate::error::{Error, Result};
use crate::pathspace::{
    canonicalize, check_finite_path, d_e2, end_vertex, enumerate_paths, tail_equivalent, LazyPath, PathContext,
    PathDistance, TailSpec,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingPair {
    lower: BratteliDiagram,
    upper: BratteliDiagram,
    // [side][level 0..=stable][w]
    vertex_maps: [Vec<Vec<usize>>; 2],
    // [side][level-1][f] for levels 1..=stable
    edge_maps: [Vec<Vec<usize>>; 2],
    stable: usize,
    // [level-1][e] -> (side, lower edge)
    lookup: Vec<Vec<Option<(usize, usize)>>>,
}

/// Outcome of one structural condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionOutcome {
    /// 1..=6: vertex levels, edge levels, incidence, injectivity, shared
    /// vertex map, disjoint images.
    pub condition: usize,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub outcomes: Vec<ConditionOutcome>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn passed(&self, condition: usize) -> bool {
        self.outcomes.iter().any(|o| o.condition == condition && o.passed)
    }
}

pub const CONDITION_NAMES: [&str; 6] = [
    "vertex map preserves levels",
    "edge maps preserve levels",
    "sources and targets intertwined",
    "edge maps injective",
    "shared vertex map",
    "edge images disjoint",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FibreClassification {
    Singleton,
    Pair {
        /// Canonical form of the other point of the fibre.
        partner: LazyPath,
        /// First level where the two points differ.
        splitting_level: usize,
        /// Embedding the input path eventually follows.
        side: usize,
        /// Least level after which every edge lies in that embedding.
        n0: usize,
    },
}

impl FibreClassification {
    pub fn partner(&self) -> Option<&LazyPath> {
        match self {
            FibreClassification::Singleton => None,
            FibreClassification::Pair { partner, .. } => Some(partner),
        }
    }
}

/// An infinite path in canonical form with its edges unrolled through one
/// full period past the stable level, so tail properties can be read off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathProfile {
    pub path: LazyPath,
    // every level past this repeats with the period
    settled: usize,
    edges: Vec<usize>,
    sides: Vec<Option<(usize, usize)>>,
}

impl PathProfile {
    fn period(&self) -> usize {
        self.edges.len() - self.settled
    }

    fn index(&self, k: usize) -> usize {
        if k <= self.edges.len() {
            k - 1
        } else {
            self.settled + (k - self.settled - 1) % self.period()
        }
    }

    /// Edge at level `k >= 1`.
    pub fn edge(&self, k: usize) -> usize {
        self.edges[self.index(k)]
    }

    /// Embedding side and lower edge of the edge at level `k`, if embedded.
    pub fn side(&self, k: usize) -> Option<(usize, usize)> {
        self.sides[self.index(k)]
    }

    pub fn side_index(&self, k: usize) -> Option<usize> {
        self.side(k).map(|s| s.0)
    }

    fn holds_from(&self, a: usize, pred: impl Fn(Option<usize>) -> bool) -> bool {
        let a = a.max(1);
        let last = (a - 1).max(self.settled) + self.period();
        (a..=last).all(|k| pred(self.side_index(k)))
    }

    /// Whether every edge at level `>= a` lies in embedding `side`.
    pub fn on_side_from(&self, a: usize, side: usize) -> bool {
        self.holds_from(a, |s| s == Some(side))
    }

    /// Whether every edge at level `>= a` is embedded.
    pub fn embedded_from(&self, a: usize) -> bool {
        self.holds_from(a, |s| s.is_some())
    }

    /// The embedding every edge eventually lies in.
    pub fn eventual_side(&self) -> Option<usize> {
        (0..2).find(|&j| self.on_side_from(self.settled + 1, j))
    }

    /// Eventual side `j` and the least `n0` with all edges past `n0` in `j`.
    pub fn tail_data(&self) -> Option<(usize, usize)> {
        let j = self.eventual_side()?;
        let n0 = (1..=self.settled).rev().find(|&k| self.side_index(k) != Some(j)).unwrap_or(0);
        Some((j, n0))
    }

    pub fn extends(&self, p: &[usize]) -> bool {
        p.iter().enumerate().all(|(i, &e)| self.edge(i + 1) == e)
    }

    pub fn first_edges(&self, n: usize) -> Vec<usize> {
        (1..=n).map(|k| self.edge(k)).collect()
    }
}

/// Open saturated sets built from finite paths.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SaturatedSet {
    /// The cylinder of a path.
    Cylinder(Vec<usize>),
    /// The cylinder minus the paths that stay in one embedding after it.
    Punctured(Vec<usize>),
    /// Two cylinders glued across the identification.
    Glued { p: Vec<usize>, q: Vec<usize> },
    /// Paths extending `p` that stay in embedding `side` afterwards.
    Stays { side: usize, p: Vec<usize> },
    /// Paths extending `p` whose later edges are all embedded.
    Circle(Vec<usize>),
}

impl SaturatedSet {
    /// The finite paths whose cylinders contain the set.
    pub fn prefixes(&self) -> Vec<&[usize]> {
        match self {
            SaturatedSet::Cylinder(p)
            | SaturatedSet::Punctured(p)
            | SaturatedSet::Stays { p, .. }
            | SaturatedSet::Circle(p) => vec![p.as_slice()],
            SaturatedSet::Glued { p, q } => vec![p.as_slice(), q.as_slice()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularityWitness {
    pub k: usize,
    /// `n` with the pairs in `R_{n+1} - R_n`.
    pub shell: usize,
    pub split_first: usize,
    pub split_second: usize,
    pub p: Vec<usize>,
    pub p_partner: Vec<usize>,
    pub q: Vec<usize>,
    pub q_partner: Vec<usize>,
    pub samples: usize,
    pub hausdorff_hits: usize,
    pub diameter_hits: usize,
    pub verified: bool,
}

impl PathContext for EmbeddingPair {
    fn diagram(&self) -> &BratteliDiagram {
        &self.upper
    }

    fn embedded_edge(&self, side: usize, level: usize, f_edge: usize) -> Result<usize> {
        let row = self
            .edge_maps
            .get(side)
            .ok_or_else(|| Error::InvalidPath(format!("embedding side {side} is not 0 or 1")))?
            .get(self.map_level(level) - 1)
            .ok_or_else(|| Error::LevelOutOfRange { level, depth: self.stable })?;
        row.get(f_edge)
            .copied()
            .ok_or_else(|| Error::InvalidPath(format!("lower edge {f_edge} does not exist at level {level}")))
    }

    fn embedded_diagram(&self) -> Option<&BratteliDiagram> {
        Some(&self.lower)
    }

    fn stationary_level(&self) -> Option<usize> {
        Some(self.stable)
    }
}

fn stationary_from(d: &BratteliDiagram, which: &str) -> Result<usize> {
    match d.growth() {
        Growth::Stationary { from } => Ok(from),
        _ => Err(Error::Embedding(format!("{which} diagram must be stationary"))),
    }
}

impl EmbeddingPair {
    /// Builds a pair with one shared vertex map. `vertex_map[n]` covers
    /// level `n` for `n in 0..=L` and `edge_maps[j][n-1]` covers level `n`
    /// for `n in 1..=L`; both repeat the level-`L` entry afterwards.
    pub fn new(
        lower: BratteliDiagram,
        upper: BratteliDiagram,
        vertex_map: Vec<Vec<usize>>,
        edge_maps: [Vec<Vec<usize>>; 2],
    ) -> Result<Self> {
        Self::with_vertex_maps(lower, upper, [vertex_map.clone(), vertex_map], edge_maps)
    }

    /// Like [`EmbeddingPair::new`] with a separate vertex map per side, so
    /// that the shared-vertex-map condition can be checked rather than assumed.
    pub fn with_vertex_maps(
        lower: BratteliDiagram,
        upper: BratteliDiagram,
        vertex_maps: [Vec<Vec<usize>>; 2],
        edge_maps: [Vec<Vec<usize>>; 2],
    ) -> Result<Self> {
        let f_from = stationary_from(&lower, "lower")?;
        let e_from = stationary_from(&upper, "upper")?;
        let stable = edge_maps[0].len();
        if stable == 0 {
            return Err(Error::Embedding("edge maps must cover at least level 1".into()));
        }
        if stable < f_from.max(e_from) {
            return Err(Error::Embedding(format!(
                "maps stop at level {stable} before both diagrams repeat (levels {f_from}, {e_from})"
            )));
        }
        for side in 0..2 {
            if edge_maps[side].len() != stable {
                return Err(Error::Embedding("edge maps of the two sides cover different levels".into()));
            }
            if vertex_maps[side].len() != stable + 1 {
                return Err(Error::Embedding(format!(
                    "vertex map needs levels 0..={stable}, found {} entries",
                    vertex_maps[side].len()
                )));
            }
            for n in 0..=stable {
                if vertex_maps[side][n].len() != lower.vertex_count(n) {
                    return Err(Error::Embedding(format!(
                        "vertex map at level {n} has {} entries for {} vertices",
                        vertex_maps[side][n].len(),
                        lower.vertex_count(n)
                    )));
                }
            }
            for n in 1..=stable {
                if edge_maps[side][n - 1].len() != lower.edge_count(n) {
                    return Err(Error::Embedding(format!(
                        "edge map {side} at level {n} has {} entries for {} edges",
                        edge_maps[side][n - 1].len(),
                        lower.edge_count(n)
                    )));
                }
            }
        }
        let mut lookup = Vec::with_capacity(stable);
        for n in 1..=stable {
            let mut row = vec![None; upper.edge_count(n)];
            for side in 0..2 {
                for (f, &e) in edge_maps[side][n - 1].iter().enumerate() {
                    if e < row.len() && row[e].is_none() {
                        row[e] = Some((side, f));
                    }
                }
            }
            lookup.push(row);
        }
        Ok(EmbeddingPair { lower, upper, vertex_maps, edge_maps, stable, lookup })
    }

    pub fn lower(&self) -> &BratteliDiagram {
        &self.lower
    }

    pub fn upper(&self) -> &BratteliDiagram {
        &self.upper
    }

    /// Level from which the maps repeat.
    pub fn stable_level(&self) -> usize {
        self.stable
    }

    pub fn vertex_maps(&self) -> &[Vec<Vec<usize>>; 2] {
        &self.vertex_maps
    }

    pub fn edge_maps(&self) -> &[Vec<Vec<usize>>; 2] {
        &self.edge_maps
    }

    fn map_level(&self, level: usize) -> usize {
        level.clamp(1, self.stable)
    }

    /// Image of lower vertex `w` at `level` (side 0 map).
    pub fn vertex_image(&self, level: usize, w: usize) -> usize {
        self.vertex_maps[0][level.min(self.stable)][w]
    }

    /// Image of lower edge `f` at `level` under embedding `side`.
    pub fn edge_image(&self, side: usize, level: usize, f: usize) -> usize {
        self.edge_maps[side][self.map_level(level) - 1][f]
    }

    /// Embedding side and lower edge of upper edge `e` at `level`.
    pub fn side_of(&self, level: usize, e: usize) -> Option<(usize, usize)> {
        self.lookup[self.map_level(level) - 1].get(e).copied().flatten()
    }

    fn in_vertex_image(&self, level: usize, v: usize) -> bool {
        self.vertex_maps[0][level.min(self.stable)].contains(&v)
    }

    pub fn check_conditions(&self) -> ConditionReport {
        let mut found: [Option<String>; 6] = Default::default();
        let mut note = |i: usize, msg: String| {
            if found[i].is_none() {
                found[i] = Some(msg);
            }
        };
        for side in 0..2 {
            for n in 0..=self.stable {
                for (w, &v) in self.vertex_maps[side][n].iter().enumerate() {
                    if v >= self.upper.vertex_count(n) {
                        note(0, format!("side {side}: vertex {w} at level {n} maps to missing vertex {v}"));
                    }
                }
            }
            for n in 1..=self.stable {
                for (f, &e) in self.edge_maps[side][n - 1].iter().enumerate() {
                    if e >= self.upper.edge_count(n) {
                        note(1, format!("side {side}: edge {f} at level {n} maps to missing edge {e}"));
                    }
                }
            }
        }
        // one level past the stable level exercises the repeating maps
        for n in 1..=self.stable + 1 {
            let ml = self.map_level(n);
            for side in 0..2 {
                let src_map = &self.vertex_maps[side][(n - 1).min(self.stable)];
                let tgt_map = &self.vertex_maps[side][n.min(self.stable)];
                let mut seen = HashMap::new();
                for (f, &e) in self.edge_maps[side][ml - 1].iter().enumerate() {
                    if e >= self.upper.edge_count(n) {
                        continue;
                    }
                    let fe = self.lower.edge(n, f);
                    let ue = self.upper.edge(n, e);
                    if src_map.get(fe.source) != Some(&ue.source) || tgt_map.get(fe.target) != Some(&ue.target) {
                        note(
                            2,
                            format!(
                                "side {side}: edge {f} at level {n} runs {}->{} but its image {e} runs {}->{}",
                                fe.source, fe.target, ue.source, ue.target
                            ),
                        );
                    }
                    if let Some(g) = seen.insert(e, f) {
                        note(3, format!("side {side}: edges {g} and {f} at level {n} both map to {e}"));
                    }
                }
            }
            let a: HashSet<usize> = self.edge_maps[0][ml - 1].iter().copied().collect();
            if let Some(e) = self.edge_maps[1][ml - 1].iter().find(|e| a.contains(e)) {
                note(5, format!("edge {e} at level {n} is in both images"));
            }
        }
        for n in 0..=self.stable {
            for (w, (a, b)) in self.vertex_maps[0][n].iter().zip(&self.vertex_maps[1][n]).enumerate() {
                if a != b {
                    note(4, format!("vertex {w} at level {n} maps to {a} on side 0 and {b} on side 1"));
                }
            }
        }
        ConditionReport {
            outcomes: found
                .into_iter()
                .enumerate()
                .map(|(i, w)| ConditionOutcome { condition: i + 1, passed: w.is_none(), witness: w })
                .collect(),
        }
    }

    /// Canonicalizes `x` and unrolls it past the stable level.
    pub fn profile(&self, x: &LazyPath) -> Result<PathProfile> {
        let path = canonicalize(self, x)?;
        let TailSpec::Periodic(block) = &path.tail else {
            return Err(Error::TailUndecidable("tail has no periodic form over this pair".into()));
        };
        let settled = path.prefix.len().max(self.stable);
        let total = settled + block.len();
        let q = path.prefix.len();
        let edges: Vec<usize> =
            (1..=total).map(|k| if k <= q { path.prefix[k - 1] } else { block[(k - q - 1) % block.len()] }).collect();
        let sides = edges.iter().enumerate().map(|(i, &e)| self.side_of(i + 1, e)).collect();
        Ok(PathProfile { path, settled, edges, sides })
    }

    fn swap_edge(&self, level: usize, e: usize) -> usize {
        match self.side_of(level, e) {
            Some((s, f)) => self.edge_image(1 - s, level, f),
            None => e,
        }
    }

    /// The fibre of `x` under the identification.
    pub fn classify_fibre(&self, x: &LazyPath) -> Result<FibreClassification> {
        let prof = self.profile(x)?;
        self.classify_profile(&prof)
    }

    pub fn classify_profile(&self, prof: &PathProfile) -> Result<FibreClassification> {
        let Some((j, n0)) = prof.tail_data() else {
            return Ok(FibreClassification::Singleton);
        };
        let total = prof.edges.len();
        let at_n0 = if n0 >= 1 { prof.side(n0) } else { None };
        let edges: Vec<usize> = (1..=total)
            .map(|k| {
                if k > n0 {
                    self.swap_edge(k, prof.edge(k))
                } else if k == n0 {
                    match at_n0 {
                        Some((s, f)) if s == 1 - j => self.edge_image(j, k, f),
                        _ => prof.edge(k),
                    }
                } else {
                    prof.edge(k)
                }
            })
            .collect();
        let splitting_level = match (n0, at_n0) {
            (0, _) => 1,
            (_, Some((s, _))) if s == 1 - j => n0,
            _ => n0 + 1,
        };
        let raw = LazyPath::periodic(edges[..prof.settled].to_vec(), edges[prof.settled..].to_vec());
        let partner = canonicalize(self, &raw)?;
        Ok(FibreClassification::Pair { partner, splitting_level, side: j, n0 })
    }

    /// The other point of the fibre of `x`, or `x` itself.
    pub fn partner(&self, x: &LazyPath) -> Result<LazyPath> {
        match self.classify_fibre(x)? {
            FibreClassification::Singleton => canonicalize(self, x),
            FibreClassification::Pair { partner, .. } => Ok(partner),
        }
    }

    /// First `p.len()` edges of the partner of any path that extends `p`
    /// and stays in embedding `side` afterwards.
    pub fn partner_prefix(&self, p: &[usize], side: usize) -> Vec<usize> {
        let n = p.len();
        let side_at = |k: usize| self.side_of(k, p[k - 1]);
        let n0 = (1..=n).rev().find(|&k| side_at(k).map(|s| s.0) != Some(side)).unwrap_or(0);
        (1..=n)
            .map(|k| {
                if k > n0 {
                    self.swap_edge(k, p[k - 1])
                } else if k == n0 {
                    match side_at(k) {
                        Some((s, f)) if s == 1 - side => self.edge_image(side, k, f),
                        _ => p[k - 1],
                    }
                } else {
                    p[k - 1]
                }
            })
            .collect()
    }

    /// Membership of a finite path in the family of paths whose last edge
    /// leaves both embeddings and lands on an embedded vertex. The empty
    /// path belongs by convention.
    pub fn is_in_p(&self, p: &[usize]) -> Result<bool> {
        check_finite_path(&self.upper, p)?;
        let Some(&last) = p.last() else {
            return Ok(true);
        };
        let n = p.len();
        Ok(self.side_of(n, last).is_none() && self.in_vertex_image(n, end_vertex(&self.upper, p)))
    }

    /// All members of that family of length at most `max_len`, shortest first.
    pub fn enumerate_p(&self, max_len: usize) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        for n in 0..=max_len {
            for p in enumerate_paths(&self.upper, n)? {
                if self.is_in_p(&p)? {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }

    /// Whether `x` extends `p` and every later edge is embedded.
    pub fn in_circle(&self, x: &LazyPath, p: &[usize]) -> Result<bool> {
        if !self.is_in_p(p)? {
            return Err(Error::MalformedSet("path is not in the family of circle prefixes".into()));
        }
        let prof = self.profile(x)?;
        Ok(prof.extends(p) && prof.embedded_from(p.len() + 1))
    }

    /// The index `m` of the two admissible shapes of a glued pair; `0` for
    /// the shape where both paths lie entirely in the embeddings.
    pub fn glued_form(&self, p: &[usize], q: &[usize]) -> Result<usize> {
        let bad = |why: &str| Err(Error::MalformedSet(format!("glued pair: {why}")));
        check_finite_path(&self.upper, p)?;
        check_finite_path(&self.upper, q)?;
        let k = p.len();
        if k == 0 || q.len() != k {
            return bad("paths must be nonempty and of equal length");
        }
        let m = (1..=k).rev().find(|&i| self.side_of(i, p[i - 1]).map(|s| s.0) != Some(0)).unwrap_or(0);
        if m == k {
            return bad("first path must end in the 0-embedding");
        }
        for i in m + 1..=k {
            let (_, f) = self.side_of(i, p[i - 1]).expect("on side 0");
            if q[i - 1] != self.edge_image(1, i, f) {
                return bad("second path must mirror the first in the 1-embedding past the branch level");
            }
        }
        if m >= 1 {
            if p[..m - 1] != q[..m - 1] {
                return bad("paths must agree before the branch level");
            }
            let expected = match self.side_of(m, p[m - 1]) {
                Some((1, f)) => self.edge_image(0, m, f),
                _ => p[m - 1],
            };
            if q[m - 1] != expected {
                return bad("branch edges do not match");
            }
        }
        Ok(m)
    }

    pub fn validate_set(&self, set: &SaturatedSet) -> Result<()> {
        match set {
            SaturatedSet::Cylinder(p) | SaturatedSet::Punctured(p) => check_finite_path(&self.upper, p),
            SaturatedSet::Stays { side, p } => {
                if *side > 1 {
                    return Err(Error::MalformedSet(format!("side {side} is not 0 or 1")));
                }
                check_finite_path(&self.upper, p)
            }
            SaturatedSet::Circle(p) => {
                if self.is_in_p(p)? {
                    Ok(())
                } else {
                    Err(Error::MalformedSet("path is not in the family of circle prefixes".into()))
                }
            }
            SaturatedSet::Glued { p, q } => self.glued_form(p, q).map(|_| ()),
        }
    }

    /// Membership of an unrolled path in a set (assumed validated).
    pub fn contains(&self, set: &SaturatedSet, x: &PathProfile) -> bool {
        let stays = |p: &[usize], j: usize| x.extends(p) && x.on_side_from(p.len() + 1, j);
        match set {
            SaturatedSet::Cylinder(p) => x.extends(p),
            SaturatedSet::Punctured(p) => x.extends(p) && !stays(p, 0) && !stays(p, 1),
            SaturatedSet::Glued { p, q } => (x.extends(p) && !stays(p, 1)) || (x.extends(q) && !stays(q, 0)),
            SaturatedSet::Stays { side, p } => stays(p, *side),
            SaturatedSet::Circle(p) => x.extends(p) && x.embedded_from(p.len() + 1),
        }
    }

    pub fn member(&self, set: &SaturatedSet, x: &LazyPath) -> Result<bool> {
        self.validate_set(set)?;
        Ok(self.contains(set, &self.profile(x)?))
    }

    /// The glued pair with first path `p` (which must end in the 0-embedding).
    pub fn glued_partner(&self, p: &[usize]) -> Result<Vec<usize>> {
        let k = p.len();
        if k == 0 || self.side_of(k, p[k - 1]).map(|s| s.0) != Some(0) {
            return Err(Error::MalformedSet("path must end in the 0-embedding".into()));
        }
        let m = (1..=k).rev().find(|&i| self.side_of(i, p[i - 1]).map(|s| s.0) != Some(0)).unwrap_or(0);
        Ok((1..=k)
            .map(|i| {
                if i > m {
                    self.swap_edge(i, p[i - 1])
                } else if i == m {
                    match self.side_of(i, p[i - 1]) {
                        Some((1, f)) => self.edge_image(0, i, f),
                        _ => p[i - 1],
                    }
                } else {
                    p[i - 1]
                }
            })
            .collect())
    }

    /// Two families of pairwise disjoint open saturated sets at scale `n`
    /// that together cover the path space. The first holds cylinders and
    /// punctured cylinders of length `n`; the second holds the glued sets
    /// of length `n + 1`, which pick up the paths staying in one embedding.
    pub fn covering_families(&self, n: usize) -> Result<(Vec<SaturatedSet>, Vec<SaturatedSet>)> {
        if n == 0 {
            return Err(Error::MalformedSet("scale must be at least 1".into()));
        }
        let mut first = Vec::new();
        for p in enumerate_paths(&self.upper, n)? {
            if self.side_of(n, p[n - 1]).is_some() {
                first.push(SaturatedSet::Punctured(p));
            } else {
                first.push(SaturatedSet::Cylinder(p));
            }
        }
        let mut second = Vec::new();
        for p in enumerate_paths(&self.upper, n + 1)? {
            if self.side_of(n + 1, p[n]).map(|s| s.0) == Some(0) {
                let q = self.glued_partner(&p)?;
                second.push(SaturatedSet::Glued { p, q });
            }
        }
        Ok((first, second))
    }

    fn tail_pair(&self, x: &LazyPath, y: &LazyPath) -> Result<(PathProfile, PathProfile)> {
        if tail_equivalent(self, x, y)?.is_none() {
            return Err(Error::InvalidPath("pair is not tail equivalent".into()));
        }
        Ok((self.profile(x)?, self.profile(y)?))
    }

    /// Whether both coordinates eventually follow the same embedding, i.e.
    /// the fibre of the pair has two points.
    pub fn in_h(&self, x: &LazyPath, y: &LazyPath) -> Result<bool> {
        Ok(self.l_side(x, y)?.is_some())
    }

    /// The embedding both coordinates eventually follow.
    pub fn l_side(&self, x: &LazyPath, y: &LazyPath) -> Result<Option<usize>> {
        let (px, py) = self.tail_pair(x, y)?;
        Ok(match (px.eventual_side(), py.eventual_side()) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        })
    }

    /// Membership in the part of `H` with fibres wider than `2^-n`: some
    /// coordinate stays in one embedding from level `n` on.
    pub fn in_h2n(&self, x: &LazyPath, y: &LazyPath, n: usize) -> Result<bool> {
        if self.l_side(x, y)?.is_none() {
            return Ok(false);
        }
        let (px, py) = self.tail_pair(x, y)?;
        Ok((0..2).any(|j| px.on_side_from(n, j) || py.on_side_from(n, j)))
    }

    /// Open cycles (as tail descriptors) available at each vertex once the
    /// diagrams repeat: closed walks of length at most `max_block` in the
    /// upper diagram and images of closed walks in the lower one.
    pub fn tail_family(&self, max_block: usize) -> Vec<(usize, TailSpec)> {
        let lvl = self.stable.max(1);
        let mut out = Vec::new();
        for (v, walk) in closed_walks(&self.upper, lvl, max_block) {
            out.push((v, TailSpec::Periodic(walk)));
        }
        for (w, walk) in closed_walks(&self.lower, lvl, max_block) {
            let v = self.vertex_image(lvl, w);
            for side in 0..2 {
                out.push((v, TailSpec::Embedded { side, block: walk.clone() }));
            }
        }
        out
    }

    /// All distinct canonical paths with an explicit prefix of length `depth`
    /// followed by a tail from [`EmbeddingPair::tail_family`].
    pub fn generating_family(&self, depth: usize, max_block: usize) -> Result<Vec<LazyPath>> {
        let depth = depth.max(self.stable);
        let tails = self.tail_family(max_block);
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for p in enumerate_paths(&self.upper, depth)? {
            let v = end_vertex(&self.upper, &p);
            for (u, t) in &tails {
                if *u != v {
                    continue;
                }
                let c = canonicalize(self, &LazyPath::new(p.clone(), t.clone()))?;
                if seen.insert(c.clone()) {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    /// A random path extending `p`: a short random continuation followed by
    /// a tail drawn from the tail family.
    pub fn random_extension(&self, p: &[usize], rng: &mut impl Rng, tails: &[(usize, TailSpec)]) -> Result<LazyPath> {
        for _ in 0..64 {
            let mut q = p.to_vec();
            let extra = rng.gen_range(0..4);
            while q.len() < self.stable || q.len() < p.len() + extra {
                let level = q.len() + 1;
                let outs = self.upper.out_edges(level, end_vertex(&self.upper, &q));
                if outs.is_empty() {
                    break;
                }
                q.push(outs[rng.gen_range(0..outs.len())]);
            }
            let v = end_vertex(&self.upper, &q);
            let here: Vec<&TailSpec> = tails.iter().filter(|(u, _)| *u == v).map(|(_, t)| t).collect();
            if here.is_empty() {
                continue;
            }
            let t = here[rng.gen_range(0..here.len())].clone();
            return canonicalize(self, &LazyPath::new(q, t));
        }
        Err(Error::TailUndecidable("no tail reachable from the sampled continuation".into()))
    }

    /// Open saturated neighbourhood of a two-point fibre `{(x,y), (x',y')}`
    /// at scale `eps`, checked on `samples` random members: every sampled
    /// fibre stays inside and is either Hausdorff-close to the given one or
    /// has small diameter.
    pub fn regularity_witness(
        &self,
        a: (&LazyPath, &LazyPath),
        b: (&LazyPath, &LazyPath),
        eps: &BigRational,
        samples: usize,
        seed: u64,
    ) -> Result<RegularityWitness> {
        let not_fibre = || Error::Embedding("inputs do not form a two-point fibre".into());
        let ca = (canonicalize(self, a.0)?, canonicalize(self, a.1)?);
        let cb = (canonicalize(self, b.0)?, canonicalize(self, b.1)?);
        let shell_a = tail_equivalent(self, &ca.0, &ca.1)?.ok_or_else(not_fibre)?;
        let shell_b = tail_equivalent(self, &cb.0, &cb.1)?.ok_or_else(not_fibre)?;
        let px = self.profile(&ca.0)?;
        let py = self.profile(&ca.1)?;
        let (cx, cy) = (self.classify_profile(&px)?, self.classify_profile(&py)?);
        let (
            FibreClassification::Pair { partner: x1, splitting_level: m, side: sx, n0: n0x },
            FibreClassification::Pair { partner: y1, splitting_level: l, side: sy, n0: n0y },
        ) = (cx, cy)
        else {
            return Err(not_fibre());
        };
        if x1 != cb.0 || y1 != cb.1 || sx != sy || shell_a != shell_b {
            return Err(not_fibre());
        }
        // orient so that the first pair eventually follows the 0-embedding
        let (first, second) = if sx == 0 { (ca, cb) } else { (cb, ca) };
        let (n0x, n0y) = if sx == 0 {
            (n0x, n0y)
        } else {
            (self.profile(&first.0)?.tail_data().ok_or_else(not_fibre)?.1, self.profile(&first.1)?.tail_data().ok_or_else(not_fibre)?.1)
        };
        let shell = shell_a - 1;
        let mut k = l.max(m).max(shell + 1).max(n0x + 1).max(n0y + 1).max(1);
        while PathDistance::Pow(k).to_rational() >= *eps {
            k += 1;
        }
        let trunc = |x: &LazyPath| -> Result<Vec<usize>> { Ok(self.profile(x)?.first_edges(k)) };
        let (p, q) = (trunc(&first.0)?, trunc(&first.1)?);
        let (p1, q1) = (trunc(&second.0)?, trunc(&second.1)?);
        let vx = SaturatedSet::Glued { p: p.clone(), q: p1.clone() };
        let vy = SaturatedSet::Glued { p: q.clone(), q: q1.clone() };
        self.validate_set(&vx)?;
        self.validate_set(&vy)?;

        let in_u = |u: &LazyPath, w: &LazyPath| -> Result<bool> {
            let (pu, pw) = (self.profile(u)?, self.profile(w)?);
            let same_tail = (k + 1..=k + 1 + pu.settled.max(pw.settled) + pu.period() * pw.period())
                .all(|i| pu.edge(i) == pw.edge(i));
            let bisection = same_tail && ((pu.extends(&p) && pw.extends(&q)) || (pu.extends(&p1) && pw.extends(&q1)));
            Ok(bisection && self.contains(&vx, &pu) && self.contains(&vy, &pw))
        };
        let given = [first.clone(), second.clone()];
        let tails = self.tail_family(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut taken, mut hausdorff_hits, mut diameter_hits) = (0, 0, 0);
        let mut verified = true;
        let mut attempts = 0;
        while taken < samples {
            attempts += 1;
            if attempts > samples * 200 + 1000 {
                return Err(Error::Embedding("could not sample enough points of the neighbourhood".into()));
            }
            let (sp, sq) = if rng.gen_bool(0.5) { (&p, &q) } else { (&p1, &q1) };
            let z = self.random_extension(sp, &mut rng, &tails)?;
            let zp = self.profile(&z)?;
            let u = z.clone();
            let w = self.align_tail(&zp, sq, k)?;
            if !in_u(&u, &w)? {
                continue;
            }
            taken += 1;
            let fibre = self.pair_fibre(&u, &w)?;
            let saturated = fibre.iter().all(|(s, t)| in_u(s, t).unwrap_or(false));
            let close = hausdorff(self, &given, &fibre)?.to_rational() < *eps;
            let thin = diameter(self, &fibre)?.to_rational() < *eps;
            hausdorff_hits += usize::from(close);
            diameter_hits += usize::from(thin);
            verified &= saturated && (close || thin);
        }
        Ok(RegularityWitness {
            k,
            shell,
            split_first: m,
            split_second: l,
            p,
            p_partner: p1,
            q,
            q_partner: q1,
            samples: taken,
            hausdorff_hits,
            diameter_hits,
            verified,
        })
    }

    // the path `q` followed by the edges of `z` past level k
    fn align_tail(&self, z: &PathProfile, q: &[usize], k: usize) -> Result<LazyPath> {
        let settled = z.settled.max(k);
        let mut prefix = q.to_vec();
        prefix.extend((k + 1..=settled).map(|i| z.edge(i)));
        let block: Vec<usize> = (settled + 1..=settled + z.period()).map(|i| z.edge(i)).collect();
        canonicalize(self, &LazyPath::periodic(prefix, block))
    }

    /// All pairs identified with `(x, y)`.
    pub fn pair_fibre(&self, x: &LazyPath, y: &LazyPath) -> Result<Vec<(LazyPath, LazyPath)>> {
        let xs = dedup(vec![canonicalize(self, x)?, self.partner(x)?]);
        let ys = dedup(vec![canonicalize(self, y)?, self.partner(y)?]);
        let mut out = Vec::new();
        for a in &xs {
            for b in &ys {
                if tail_equivalent(self, a, b)?.is_some() {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        Ok(out)
    }

    /// Classes of the finite equivalence relation on the paths ending at
    /// vertex `v` of level `n`: `labels[i][j]` names the class of the
    /// bisection from path `i` to path `j`, two bisections sharing a class
    /// when the identification carries points of one into the other.
    pub fn fibre_classes(&self, n: usize, v: usize) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
        let paths: Vec<Vec<usize>> =
            enumerate_paths(&self.upper, n)?.into_iter().filter(|p| end_vertex(&self.upper, p) == v).collect();
        let index: HashMap<&[usize], usize> = paths.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
        let size = paths.len();
        let mut parent: Vec<usize> = (0..size * size).collect();
        fn find(parent: &mut [usize], mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        if self.in_vertex_image(n, v) {
            for side in 0..2 {
                let moved: Vec<usize> = paths.iter().map(|p| index[self.partner_prefix(p, side).as_slice()]).collect();
                for i in 0..size {
                    for j in 0..size {
                        let a = find(&mut parent, i * size + j);
                        let b = find(&mut parent, moved[i] * size + moved[j]);
                        parent[a] = b;
                    }
                }
            }
        }
        let mut names = HashMap::new();
        let mut labels = vec![vec![0; size]; size];
        for i in 0..size {
            for j in 0..size {
                let r = find(&mut parent, i * size + j);
                let next = names.len();
                labels[i][j] = *names.entry(r).or_insert(next);
            }
        }
        Ok((paths, labels))
    }
}

fn dedup(mut v: Vec<LazyPath>) -> Vec<LazyPath> {
    v.dedup();
    v
}

fn closed_walks(d: &BratteliDiagram, level: usize, max_len: usize) -> Vec<(usize, Vec<usize>)> {
    let lvl = level.max(d.stationary_from().unwrap_or(1)) + 1;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for start in 0..d.vertex_count(lvl - 1) {
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(start, Vec::new())];
        while let Some((v, walk)) = stack.pop() {
            if !walk.is_empty() && v == start {
                let prim = primitive(&walk);
                if seen.insert((start, prim.clone())) {
                    out.push((start, prim));
                }
            }
            if walk.len() == max_len {
                continue;
            }
            for e in d.out_edges(lvl, v) {
                let mut w = walk.clone();
                w.push(e);
                stack.push((d.edge(lvl, e).target, w));
            }
        }
    }
    out.sort();
    out
}

fn primitive(b: &[usize]) -> Vec<usize> {
    let p = b.len();
    (1..=p)
        .find(|&d| p % d == 0 && (0..p).all(|i| b[i] == b[i % d]))
        .map_or_else(|| b.to_vec(), |d| b[..d].to_vec())
}

fn hausdorff<C: PathContext + ?Sized>(
    ctx: &C,
    a: &[(LazyPath, LazyPath)],
    b: &[(LazyPath, LazyPath)],
) -> Result<PathDistance> {
    let one_way = |s: &[(LazyPath, LazyPath)], t: &[(LazyPath, LazyPath)]| -> Result<PathDistance> {
        let mut worst = PathDistance::Zero;
        for (x, y) in s {
            let mut best = PathDistance::Pow(0);
            for (u, w) in t {
                best = best.min(d_e2(ctx, (x, y), (u, w))?);
            }
            worst = worst.max(best);
        }
        Ok(worst)
    };
    Ok(one_way(a, b)?.max(one_way(b, a)?))
}

fn diameter<C: PathContext + ?Sized>(ctx: &C, s: &[(LazyPath, LazyPath)]) -> Result<PathDistance> {
    let mut worst = PathDistance::Zero;
    for (x, y) in s {
        for (u, w) in s {
            worst = worst.max(d_e2(ctx, (x, y), (u, w))?);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::linalg::q_frac;

    fn emb(side: usize, block: &[usize]) -> LazyPath {
        LazyPath::embedded(vec![], side, block.to_vec())
    }

    #[test]
    fn catalog_pairs_satisfy_conditions() {
        for pair in [catalog::binary_pair(), catalog::ternary_pair(), catalog::quaternary_pair(), catalog::figure_two_pair()] {
            let r = pair.check_conditions();
            assert!(r.all_pass(), "{r:?}");
        }
    }

    #[test]
    fn broken_conditions_are_reported() {
        let e = catalog::two_infinity();
        let f = catalog::single_edge();
        let overlap = EmbeddingPair::new(f.clone(), e.clone(), vec![vec![0], vec![0]], [vec![vec![0]], vec![vec![0]]]).unwrap();
        let r = overlap.check_conditions();
        assert!(!r.passed(6));
        assert!(r.passed(5));
        let fig = catalog::figure_two();
        let split = EmbeddingPair::with_vertex_maps(
            f.clone(),
            fig,
            [vec![vec![0], vec![1], vec![1]], vec![vec![0], vec![0], vec![0]]],
            [vec![vec![1], vec![2]], vec![vec![0], vec![0]]],
        )
        .unwrap();
        let r = split.check_conditions();
        assert!(!r.passed(5));
        assert!(r.outcomes[4].witness.is_some());
    }

    #[test]
    fn fibre_rules() {
        let pair = catalog::binary_pair();
        match pair.classify_fibre(&emb(0, &[0])).unwrap() {
            FibreClassification::Pair { partner, splitting_level, side, n0 } => {
                assert_eq!(partner, LazyPath::periodic(vec![], vec![1]));
                assert_eq!((splitting_level, side, n0), (1, 0, 0));
            }
            other => panic!("{other:?}"),
        }
        // binary carry: 1000... ~ 0111...
        let x = LazyPath::periodic(vec![1], vec![0]);
        match pair.classify_fibre(&x).unwrap() {
            FibreClassification::Pair { partner, splitting_level, n0, .. } => {
                assert_eq!(partner, LazyPath::periodic(vec![0], vec![1]));
                assert_eq!((splitting_level, n0), (1, 1));
            }
            other => panic!("{other:?}"),
        }
        let ternary = catalog::ternary_pair();
        let x = LazyPath::periodic(vec![], vec![2, 0]);
        assert_eq!(ternary.classify_fibre(&x).unwrap(), FibreClassification::Singleton);
        // the middle edge blocks the carry
        let x = LazyPath::periodic(vec![0, 2], vec![0]);
        match ternary.classify_fibre(&x).unwrap() {
            FibreClassification::Pair { partner, splitting_level, .. } => {
                assert_eq!(partner, LazyPath::periodic(vec![0, 2], vec![1]));
                assert_eq!(splitting_level, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn partner_is_an_involution() {
        let pair = catalog::figure_two_pair();
        for x in pair.generating_family(4, 2).unwrap() {
            if let FibreClassification::Pair { partner, splitting_level, .. } = pair.classify_fibre(&x).unwrap() {
                match pair.classify_fibre(&partner).unwrap() {
                    FibreClassification::Pair { partner: back, splitting_level: s, .. } => {
                        assert_eq!(back, x);
                        assert_eq!(s, splitting_level);
                    }
                    FibreClassification::Singleton => panic!("partner of {x} is a singleton"),
                }
            }
        }
    }

    #[test]
    fn circle_prefixes() {
        let pair = catalog::ternary_pair();
        assert!(pair.is_in_p(&[]).unwrap());
        assert!(pair.is_in_p(&[2]).unwrap());
        assert!(!pair.is_in_p(&[0]).unwrap());
        assert_eq!(pair.enumerate_p(2).unwrap(), vec![vec![], vec![2], vec![0, 2], vec![1, 2], vec![2, 2]]);
        assert_eq!(pair.enumerate_p(3).unwrap().len(), 14);
        assert_eq!(catalog::binary_pair().enumerate_p(4).unwrap(), vec![Vec::<usize>::new()]);
        assert!(pair.in_circle(&LazyPath::periodic(vec![2], vec![0]), &[2]).unwrap());
        assert!(!pair.in_circle(&LazyPath::periodic(vec![2], vec![0, 2]), &[2]).unwrap());
        assert!(pair.in_circle(&LazyPath::periodic(vec![2], vec![0]), &[0]).is_err());
    }

    #[test]
    fn glued_forms() {
        let pair = catalog::ternary_pair();
        assert_eq!(pair.glued_form(&[0, 0], &[1, 1]).unwrap(), 0);
        assert_eq!(pair.glued_form(&[2, 0], &[2, 1]).unwrap(), 1);
        assert_eq!(pair.glued_form(&[1, 0], &[0, 1]).unwrap(), 1);
        assert!(pair.glued_form(&[1, 0], &[1, 1]).is_err());
        assert!(pair.glued_form(&[0, 1], &[1, 0]).is_err());
        assert_eq!(pair.glued_partner(&[1, 2, 0]).unwrap(), vec![1, 2, 1]);
    }

    #[test]
    fn covering_at_scale_one() {
        let pair = catalog::ternary_pair();
        let (a, b) = pair.covering_families(1).unwrap();
        assert_eq!(
            a,
            vec![
                SaturatedSet::Punctured(vec![0]),
                SaturatedSet::Punctured(vec![1]),
                SaturatedSet::Cylinder(vec![2]),
            ]
        );
        assert_eq!(b.len(), 3);
        let fam = pair.generating_family(3, 2).unwrap();
        for x in &fam {
            let prof = pair.profile(x).unwrap();
            let hits_a = a.iter().filter(|s| pair.contains(s, &prof)).count();
            let hits_b = b.iter().filter(|s| pair.contains(s, &prof)).count();
            assert!(hits_a <= 1 && hits_b <= 1 && hits_a + hits_b >= 1, "{x}");
        }
    }

    #[test]
    fn subgroupoid_membership() {
        let pair = catalog::ternary_pair();
        let x = LazyPath::periodic(vec![2, 2, 2, 2], vec![0]);
        let y = LazyPath::periodic(vec![1, 2, 0, 2], vec![0]);
        assert!(pair.in_h(&x, &y).unwrap());
        assert_eq!(pair.l_side(&x, &y).unwrap(), Some(0));
        assert!(pair.in_h2n(&x, &y, 5).unwrap());
        assert!(!pair.in_h2n(&x, &y, 4).unwrap());
        let z = LazyPath::periodic(vec![], vec![2]);
        assert!(!pair.in_h(&z, &z).unwrap());
        assert!(pair.in_h(&x, &z).is_err());
    }

    #[test]
    fn regularity_on_the_carry_pair() {
        let pair = catalog::binary_pair();
        let x = LazyPath::periodic(vec![1], vec![0]);
        let y = LazyPath::periodic(vec![], vec![0]);
        let x1 = pair.partner(&x).unwrap();
        let y1 = pair.partner(&y).unwrap();
        let w = pair.regularity_witness((&x, &y), (&x1, &y1), &q_frac(1, 8), 16, 0).unwrap();
        assert_eq!(w.k, 4);
        assert_eq!(w.samples, 16);
        assert!(w.verified, "{w:?}");
        let w = pair.regularity_witness((&y, &y), (&y1, &y1), &q_frac(3, 2), 8, 1).unwrap();
        assert_eq!(w.k, 1);
        assert!(w.verified);
        assert!(pair.regularity_witness((&x, &y), (&y1, &x1), &q_frac(1, 8), 4, 0).is_err());
    }

    #[test]
    fn shadow_classes_on_the_binary_pair() {
        let pair = catalog::binary_pair();
        let (paths, labels) = pair.fibre_classes(2, 0).unwrap();
        assert_eq!(paths.len(), 4);
        // carries chain every diagonal bisection together
        assert!((0..4).all(|i| labels[i][i] == labels[0][0]));
        // classes are the diagonals j - i mod 4 of the rotation picture
        assert_eq!(labels[1][2], labels[0][1]);
        assert!(labels.iter().flatten().any(|&c| c != labels[0][0]));
    }

    #[test]
    fn constructed_sets_are_saturated_and_cover() {
        for pair in [catalog::ternary_pair(), catalog::figure_two_pair(), catalog::quaternary_pair()] {
            let fam: Vec<PathProfile> =
                pair.generating_family(4, 2).unwrap().iter().map(|x| pair.profile(x).unwrap()).collect();
            let partners: Vec<PathProfile> =
                fam.iter().map(|p| pair.profile(&pair.partner(&p.path).unwrap()).unwrap()).collect();
            let mut sets = Vec::new();
            for n in 1..=3 {
                let (a, b) = pair.covering_families(n).unwrap();
                for x in &fam {
                    let ha = a.iter().filter(|s| pair.contains(s, x)).count();
                    let hb = b.iter().filter(|s| pair.contains(s, x)).count();
                    assert!(ha <= 1 && hb <= 1 && ha + hb >= 1, "scale {n}: {}", x.path);
                }
                sets.extend(a);
                sets.extend(b);
            }
            sets.extend(pair.enumerate_p(3).unwrap().into_iter().map(SaturatedSet::Circle));
            for s in &sets {
                pair.validate_set(s).unwrap();
                for (x, y) in fam.iter().zip(&partners) {
                    assert_eq!(pair.contains(s, x), pair.contains(s, y), "{s:?} splits {}", x.path);
                }
            }
        }
    }
}
