//! Extensions of a Bratteli-Vershik system by the attractor of an iterated
//! function system. Every edge carries either a word of maps or the
//! identity; the fibre over a path is the nested intersection of the
//! images of the attractor under the words read along it, which is a point
//! when non-identity edges recur and a copy of the attractor otherwise.

use num::{BigRational, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagram::{BratteliDiagram, Growth};
use crate::error::{Error, Result};
use crate::ifs::{self, AffineMap, AffineSystem, BoxRegion, IfsSystem, Point};
use crate::linalg::{self, q};
use crate::pathspace::{canonicalize, d_e, edge_at_canonical, end_vertex, LazyPath, PathContext, TailSpec};
use crate::vershik::OrderedSystem;

/// Which word each edge carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssignmentRule {
    /// Single vertex with `k^n + 1` edges at level `n` for `k` maps: the
    /// middle-ranked edge is the identity and the others carry every word
    /// of length `n` in lexicographic order (first letter most significant).
    FullWords,
    /// Explicit words per level and edge (`None` for the identity); the last
    /// level repeats for deeper levels of a stationary diagram.
    Table(Vec<Vec<Option<Vec<usize>>>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpsAssignment {
    diagram: BratteliDiagram,
    ifs: IfsSystem,
    rule: AssignmentRule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentCheck {
    pub name: &'static str,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentReport {
    pub checks: Vec<AssignmentCheck>,
    /// Levels examined.
    pub depth: usize,
    /// Whether coverage was settled symbolically (every long word has a
    /// covering prefix) rather than on a net of attractor points.
    pub exact_cover: bool,
    /// Spacing of the net used when coverage was not settled symbolically.
    pub net_tolerance: f64,
}

impl AssignmentReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn passed(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c.name == name && c.passed)
    }
}

/// Default spacing target for the coverage net.
pub const NET_TOLERANCE: f64 = 1e-6;
// largest net examined when the target spacing needs more points
const NET_POINT_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum Fibre {
    /// A single point, located inside `cell`, the image of the hull under
    /// `word`; its diameter is at most `error`.
    Singleton { word: Vec<usize>, cell: Option<BoxRegion>, error: f64 },
    /// The image of the whole attractor under `word`, read along the first
    /// `m` levels.
    CopyOfC { word: Vec<usize>, m: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FibreCoord {
    /// The fibre is a point and the coordinate is implied.
    Unique,
    Point(Point),
}

/// A point of the extension: a path and a coordinate in its fibre.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtPoint {
    pub x: LazyPath,
    pub c: FibreCoord,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HausdorffBound {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpsWitness {
    pub k: usize,
    pub cylinder: Vec<usize>,
    pub samples: usize,
    pub diameter_hits: usize,
    pub hausdorff_hits: usize,
    pub verified: bool,
}

impl PathContext for DpsAssignment {
    fn diagram(&self) -> &BratteliDiagram {
        &self.diagram
    }

    fn identity_edge(&self, level: usize) -> Result<usize> {
        let ids: Vec<usize> =
            (0..self.diagram.edge_count(level)).filter(|&e| self.word(level, e).is_none()).collect();
        match ids.as_slice() {
            [e] => Ok(*e),
            [] => Err(Error::TailUndecidable(format!("no identity edge at level {level}"))),
            _ => Err(Error::TailUndecidable(format!("several identity edges at level {level}"))),
        }
    }
}

fn full_mid(d: &BratteliDiagram, level: usize) -> usize {
    (d.edge_count(level) - 1) / 2
}

impl DpsAssignment {
    /// The full-word assignment on the odometer with `k^n + 1` edges.
    pub fn full_words(ifs: IfsSystem) -> Result<Self> {
        let k = ifs.map_count() as u64;
        let diagram = BratteliDiagram::odometer(k, 1)?;
        Ok(DpsAssignment { diagram, ifs, rule: AssignmentRule::FullWords })
    }

    pub fn table(diagram: BratteliDiagram, ifs: IfsSystem, levels: Vec<Vec<Option<Vec<usize>>>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Assignment("table has no levels".into()));
        }
        let reach = match diagram.growth() {
            Growth::Stationary { from } => from,
            Growth::Finite => diagram.explicit_depth(),
            Growth::Odometer { .. } => return Err(Error::Assignment("tables need explicit edge levels".into())),
        };
        if levels.len() < reach {
            return Err(Error::Assignment(format!("table covers {} levels, diagram needs {reach}", levels.len())));
        }
        if diagram.depth().is_some_and(|d| levels.len() > d) {
            return Err(Error::Assignment("table is deeper than the diagram".into()));
        }
        for (i, row) in levels.iter().enumerate() {
            let n = i + 1;
            if row.len() != diagram.edge_count(n) {
                return Err(Error::Assignment(format!(
                    "level {n} assigns {} edges, diagram has {}",
                    row.len(),
                    diagram.edge_count(n)
                )));
            }
            for w in row.iter().flatten() {
                if w.is_empty() || w.iter().any(|&f| f >= ifs.map_count()) {
                    return Err(Error::Assignment(format!("bad word {w:?} at level {n}")));
                }
            }
        }
        Ok(DpsAssignment { diagram, ifs, rule: AssignmentRule::Table(levels) })
    }

    pub fn diagram(&self) -> &BratteliDiagram {
        &self.diagram
    }

    pub fn ifs(&self) -> &IfsSystem {
        &self.ifs
    }

    pub fn rule(&self) -> &AssignmentRule {
        &self.rule
    }

    /// Word on edge `e` of level `n`, `None` for the identity.
    pub fn word(&self, n: usize, e: usize) -> Option<Vec<usize>> {
        match &self.rule {
            AssignmentRule::FullWords => {
                let mid = full_mid(&self.diagram, n);
                if e == mid {
                    return None;
                }
                let mut r = if e < mid { e } else { e - 1 };
                let k = self.ifs.map_count();
                let mut w = vec![0; n];
                for slot in w.iter_mut().rev() {
                    *slot = r % k;
                    r /= k;
                }
                Some(w)
            }
            AssignmentRule::Table(levels) => levels[(n - 1).min(levels.len() - 1)].get(e).cloned().flatten(),
        }
    }

    fn is_identity(&self, n: usize, e: usize) -> bool {
        self.word(n, e).is_none()
    }

    /// Checks the three assignment properties and the word lengths on
    /// levels `1..=depth`.
    pub fn validate(&self, depth: usize) -> AssignmentReport {
        let d = &self.diagram;
        let depth = match (&self.rule, d.depth()) {
            (_, Some(fd)) => depth.min(fd),
            _ => depth,
        };
        let mut extremal = None;
        let mut lengths = None;
        let mut cover = None;
        let mut exact_cover = true;
        let mut net_tolerance: f64 = 0.0;
        for n in 1..=depth {
            for v in 0..d.vertex_count(n) {
                for e in [d.max_in_edge(n, v), d.min_in_edge(n, v)].into_iter().flatten() {
                    if self.is_identity(n, e) && extremal.is_none() {
                        extremal = Some(format!("extremal edge {e} at level {n} carries the identity"));
                    }
                }
                let words: Vec<Vec<usize>> = (0..d.edge_count(n))
                    .filter(|&e| d.edge(n, e).target == v)
                    .filter_map(|e| self.word(n, e))
                    .collect();
                if cover.is_none() {
                    match self.covers(&words) {
                        Ok(None) => {}
                        Ok(Some(tol)) => {
                            exact_cover = false;
                            net_tolerance = net_tolerance.max(tol);
                        }
                        Err(w) => cover = Some(format!("vertex {v} at level {n}: {w}")),
                    }
                }
            }
            for e in 0..d.edge_count(n) {
                if let Some(w) = self.word(n, e) {
                    if w.len() != n && lengths.is_none() {
                        lengths = Some(format!("edge {e} at level {n} carries a word of length {}", w.len()));
                    }
                }
            }
        }
        let identity_path = self.identity_path_witness();
        let check = |name, w: Option<String>| AssignmentCheck { name, passed: w.is_none(), witness: w };
        AssignmentReport {
            checks: vec![
                check("extremal edges carry maps", extremal),
                check("non-identity images cover the attractor", cover),
                check("identity edges contain an infinite path", identity_path),
                check("level-n words have length n", lengths),
            ],
            depth,
            exact_cover,
            net_tolerance,
        }
    }

    // Ok(None): every word of the maximal length has a prefix among `words`.
    // Ok(Some(tol)): every net point lies in a cell box, net spacing `tol`.
    // Err: witness of a gap.
    fn covers(&self, words: &[Vec<usize>]) -> std::result::Result<Option<f64>, String> {
        if words.is_empty() {
            return Err("no non-identity edges".into());
        }
        let k = self.ifs.map_count();
        let len = words.iter().map(|w| w.len()).max().unwrap_or(0);
        let mut all = vec![Vec::new()];
        for _ in 0..len {
            all = all.into_iter().flat_map(|w: Vec<usize>| (0..k).map(move |i| [w.clone(), vec![i]].concat())).collect();
        }
        let known: std::collections::HashSet<&[usize]> = words.iter().map(|w| w.as_slice()).collect();
        let mut lens: Vec<usize> = words.iter().map(|w| w.len()).collect();
        lens.sort_unstable();
        lens.dedup();
        let uncovered: Vec<&Vec<usize>> = all.iter().filter(|u| !lens.iter().any(|&l| known.contains(&u[..l]))).collect();
        if uncovered.is_empty() {
            return Ok(None);
        }
        let IfsSystem::Affine(sys) = &self.ifs else {
            return Err(format!("the cylinder of {:?} is not covered", uncovered[0]));
        };
        // net of exact attractor points: fixed points of words of one length
        let lambda = linalg::rational_to_f64(&sys.lambda);
        let diam = linalg::rational_to_f64(&sys.hull.diameter_sq()).sqrt();
        let mut net_len = 1;
        while lambda.powi(net_len as i32) * diam > NET_TOLERANCE && k.pow(net_len as u32 + 1) <= NET_POINT_CAP {
            net_len += 1;
        }
        let boxes: Vec<BoxRegion> = words
            .iter()
            .map(|w| {
                let f = ifs::word_map(sys, w);
                BoxRegion::bounding(&sys.hull.corners().iter().map(|c| f.apply(c)).collect::<Vec<_>>())
            })
            .collect();
        let mut net = vec![Vec::new()];
        for _ in 0..net_len {
            net = net.into_iter().flat_map(|w: Vec<usize>| (0..k).map(move |i| [w.clone(), vec![i]].concat())).collect();
        }
        for u in &net {
            let Some(p) = ifs::word_map(sys, u).fixed_point() else { continue };
            if !boxes.iter().any(|b| b.contains_point(&p)) {
                let shown: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                return Err(format!("attractor point ({}) lies in no image", shown.join(", ")));
            }
        }
        Ok(Some(lambda.powi(net_len as i32) * diam))
    }

    fn identity_path_witness(&self) -> Option<String> {
        let d = &self.diagram;
        match (&self.rule, d.growth()) {
            (AssignmentRule::FullWords, _) => None,
            (AssignmentRule::Table(levels), g) => {
                let mut reach = vec![0usize];
                let mut seen_sets: Vec<Vec<usize>> = Vec::new();
                let mut n = 1;
                loop {
                    let mut next: Vec<usize> = (0..d.edge_count(n))
                        .filter(|&e| self.is_identity(n, e) && reach.contains(&d.edge(n, e).source))
                        .map(|e| d.edge(n, e).target)
                        .collect();
                    next.sort_unstable();
                    next.dedup();
                    if next.is_empty() {
                        return Some(format!("identity edges stop at level {n}"));
                    }
                    reach = next;
                    let repeating = match g {
                        Growth::Stationary { from } => n >= from.max(levels.len()),
                        _ => false,
                    };
                    if d.depth().is_some_and(|fd| n >= fd) {
                        return None;
                    }
                    if repeating {
                        if seen_sets.contains(&reach) {
                            return None;
                        }
                        seen_sets.push(reach.clone());
                    }
                    n += 1;
                }
            }
        }
    }

    /// `Some(m)` when every edge past level `m` carries the identity and
    /// `x_m` does not; `None` when non-identity edges recur forever.
    pub fn identity_tail_start(&self, x: &LazyPath) -> Result<Option<usize>> {
        let c = canonicalize(self, x)?;
        let last_map = |upto: usize| (1..=upto).rev().find(|&k| !self.is_identity(k, edge_at_canonical(self, &c, k).unwrap()));
        match (&c.tail, self.diagram.growth()) {
            (TailSpec::AllIdentity, _) => Ok(Some(last_map(c.prefix.len()).unwrap_or(0))),
            (TailSpec::AllMax | TailSpec::AllMin, _) => Ok(None),
            (TailSpec::Periodic(b), Growth::Odometer { .. }) => {
                if matches!(self.rule, AssignmentRule::FullWords) {
                    // identity ranks grow with the level, fixed indices leave them
                    let _ = b;
                    Ok(None)
                } else {
                    Err(Error::TailUndecidable("periodic tail on a table assignment over an odometer".into()))
                }
            }
            (TailSpec::Periodic(b), _) => {
                let start = c.prefix.len() + 1;
                let table_len = match &self.rule {
                    AssignmentRule::Table(levels) => levels.len(),
                    AssignmentRule::FullWords => 1,
                };
                // past both the prefix and the table the pattern repeats with the block
                let settled = start.max(table_len);
                let horizon = settled + b.len();
                let edge = |n: usize| b[(n - start) % b.len()];
                if (settled..horizon).all(|n| self.is_identity(n, edge(n))) {
                    let last = (start..horizon).rev().find(|&n| !self.is_identity(n, edge(n)));
                    Ok(Some(last.or_else(|| last_map(c.prefix.len())).unwrap_or(0)))
                } else {
                    Ok(None)
                }
            }
            (TailSpec::Embedded { .. }, _) => Err(Error::TailUndecidable("embedded tails have no assignment".into())),
        }
    }

    /// Concatenated word read along levels `1..=n` of `x`.
    pub fn word_along(&self, x: &LazyPath, n: usize) -> Result<Vec<usize>> {
        let c = canonicalize(self, x)?;
        let mut w = Vec::new();
        for k in 1..=n {
            if let Some(part) = self.word(k, edge_at_canonical(self, &c, k)?) {
                w.extend(part);
            }
        }
        Ok(w)
    }

    fn cell_error(&self, word_len: usize) -> f64 {
        let lambda = linalg::rational_to_f64(&self.ifs.lambda());
        let diam = linalg::rational_to_f64(&self.ifs.hull_diameter_sq()).sqrt();
        lambda.powi(word_len as i32) * diam
    }

    fn cell_box(&self, word: &[usize]) -> Option<BoxRegion> {
        match &self.ifs {
            IfsSystem::Affine(sys) => {
                let f = ifs::word_map(sys, word);
                Some(BoxRegion::bounding(&sys.hull.corners().iter().map(|c| f.apply(c)).collect::<Vec<_>>()))
            }
            IfsSystem::CodeSpace { .. } => None,
        }
    }

    /// The fibre over `x`; a point fibre is located by the first `depth` levels.
    pub fn fibre(&self, x: &LazyPath, depth: usize) -> Result<Fibre> {
        match self.identity_tail_start(x)? {
            Some(m) => Ok(Fibre::CopyOfC { word: self.word_along(x, m)?, m }),
            None => {
                let word = self.word_along(x, depth)?;
                Ok(Fibre::Singleton { cell: self.cell_box(&word), error: self.cell_error(word.len()), word })
            }
        }
    }

    fn affine(&self) -> Result<&AffineSystem> {
        match &self.ifs {
            IfsSystem::Affine(s) => Ok(s),
            IfsSystem::CodeSpace { .. } => Err(Error::Assignment("symbolic fibres carry no coordinates".into())),
        }
    }

    fn transport(&self, x: &LazyPath, y: &LazyPath, c: &FibreCoord) -> Result<FibreCoord> {
        let m = self.identity_tail_start(x)?;
        let my = self.identity_tail_start(y)?;
        let (Some(m), Some(my)) = (m, my) else {
            return Ok(FibreCoord::Unique);
        };
        let FibreCoord::Point(c) = c else {
            return Err(Error::Assignment("identity-tail fibre needs a coordinate".into()));
        };
        let sys = self.affine()?;
        // both paths read identities past this level
        let top = m.max(my) + 1;
        let fx = ifs::word_map(sys, &self.word_along(x, top)?);
        let fy = ifs::word_map(sys, &self.word_along(y, top)?);
        let inv = invert(&fx).ok_or_else(|| Error::Assignment("a map in the word is not invertible".into()))?;
        let cell = BoxRegion::bounding(&sys.hull.corners().iter().map(|p| fx.apply(p)).collect::<Vec<_>>());
        if !cell.contains_point(c) {
            return Err(Error::Assignment("coordinate lies outside the fibre".into()));
        }
        Ok(FibreCoord::Point(fy.apply(&inv.apply(c))))
    }

    /// The extended dynamics: the Vershik map on the path, and on an
    /// identity-tail fibre the coordinate moved through the inverse of the
    /// old word and the new word.
    pub fn phi_tilde(&self, p: &ExtPoint) -> Result<ExtPoint> {
        let sys = OrderedSystem::new(self)?;
        let y = sys.vershik(&p.x)?;
        Ok(ExtPoint { c: self.transport(&p.x, &y, &p.c)?, x: y })
    }

    pub fn phi_tilde_inverse(&self, p: &ExtPoint) -> Result<ExtPoint> {
        let sys = OrderedSystem::new(self)?;
        let y = sys.vershik_inverse(&p.x)?;
        Ok(ExtPoint { c: self.transport(&p.x, &y, &p.c)?, x: y })
    }

    // boxes covering the fibre, each meeting it, and their largest diameter
    fn fibre_cells(&self, x: &LazyPath, depth: usize) -> Result<(Vec<Vec<f64>>, f64)> {
        let sys = self.affine()?;
        let (words, err) = match self.fibre(x, depth)? {
            Fibre::Singleton { word, error, .. } => (vec![word], error),
            Fibre::CopyOfC { word, .. } => {
                let k = sys.maps.len();
                let mut extra = 0;
                while k.pow(extra + 1) <= 256 && extra < depth as u32 {
                    extra += 1;
                }
                let mut ws = vec![word.clone()];
                for _ in 0..extra {
                    ws = ws.into_iter().flat_map(|w: Vec<usize>| (0..k).map(move |i| [w.clone(), vec![i]].concat())).collect();
                }
                let e = self.cell_error(word.len() + extra as usize);
                (ws, e)
            }
        };
        let centers = words
            .iter()
            .map(|w| {
                let b = self.cell_box(w).expect("affine");
                b.lo.iter().zip(&b.hi).map(|(l, h)| linalg::rational_to_f64(&((l + h) / q(2)))).collect()
            })
            .collect();
        Ok((centers, err))
    }

    /// Certified interval for the Hausdorff distance between the fibres
    /// over `x` and `y`, viewed as subsets of the attractor.
    pub fn fibre_hausdorff(&self, x: &LazyPath, y: &LazyPath, depth: usize) -> Result<HausdorffBound> {
        if canonicalize(self, x)? == canonicalize(self, y)? {
            return Ok(HausdorffBound { lo: 0.0, hi: 0.0 });
        }
        let (a, ea) = self.fibre_cells(x, depth)?;
        let (b, eb) = self.fibre_cells(y, depth)?;
        let dist = |p: &Vec<f64>, r: &Vec<f64>| p.iter().zip(r).map(|(s, t)| (s - t) * (s - t)).sum::<f64>().sqrt();
        let directed = |s: &[Vec<f64>], t: &[Vec<f64>]| {
            s.iter().map(|p| t.iter().map(|r| dist(p, r)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
        };
        let h = directed(&a, &b).max(directed(&b, &a));
        let slack = ea + eb;
        Ok(HausdorffBound { lo: (h - slack).max(0.0), hi: h + slack })
    }

    fn random_path(&self, prefix: &[usize], rng: &mut impl Rng) -> Result<LazyPath> {
        let d = &self.diagram;
        let mut p = prefix.to_vec();
        for _ in 0..rng.gen_range(0..4) {
            let n = p.len() + 1;
            let outs = d.out_edges(n, end_vertex(d, &p));
            let pick = match rng.gen_range(0..3) {
                0 => outs[0],
                1 => outs[outs.len() - 1],
                _ => outs[rng.gen_range(0..outs.len())],
            };
            p.push(pick);
        }
        let tail = match rng.gen_range(0..4) {
            0 => TailSpec::AllMax,
            1 => TailSpec::AllMin,
            2 if matches!(self.rule, AssignmentRule::FullWords) => TailSpec::AllIdentity,
            _ => {
                let n = p.len() + 1;
                let outs = d.out_edges(n, end_vertex(d, &p));
                let loops: Vec<usize> =
                    outs.into_iter().filter(|&e| d.edge(n, e).target == end_vertex(d, &p)).take(4).collect();
                if loops.is_empty() {
                    TailSpec::AllMin
                } else {
                    TailSpec::Periodic(vec![loops[rng.gen_range(0..loops.len())]])
                }
            }
        };
        canonicalize(self, &LazyPath::new(p, tail))
    }

    /// Cylinder around `x` whose fibres are all thin or close to the fibre
    /// of `x`, checked on `samples` seeded random paths.
    pub fn regularity_witness(&self, x: &LazyPath, eps: &BigRational, samples: usize, seed: u64) -> Result<DpsWitness> {
        if !eps.is_positive() {
            return Err(Error::Assignment("eps must be positive".into()));
        }
        let eps_f = linalg::rational_to_f64(eps);
        let c = canonicalize(self, x)?;
        let tail = self.identity_tail_start(&c)?;
        let lambda = self.ifs.lambda();
        let diam_sq = self.ifs.hull_diameter_sq();
        let eps_sq = eps * eps;
        let thin = |len: usize| -> bool {
            let l = num::pow(lambda.clone(), len);
            &l * &l * &diam_sq < eps_sq
        };
        let mut k = 1;
        match tail {
            None => {
                while !(thin(k) && !self.is_identity(k, edge_at_canonical(self, &c, k)?)) {
                    k += 1;
                }
            }
            Some(m) => {
                k = k.max(m + 1);
                while !(thin(k) && linalg::q_frac(1, 1) / BigRational::from_integer((1u64 << k.min(62)).into()) < *eps)
                {
                    k += 1;
                }
            }
        }
        let cylinder: Vec<usize> = (1..=k).map(|n| edge_at_canonical(self, &c, n)).collect::<Result<_>>()?;
        let x_word = self.word_along(&c, k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut diameter_hits, mut hausdorff_hits) = (0, 0);
        let mut verified = true;
        for _ in 0..samples {
            let y = self.random_path(&cylinder, &mut rng)?;
            let ok_thin = match self.identity_tail_start(&y)? {
                None => true,
                Some(my) => my >= k || thin(self.word_along(&y, my)?.len()),
            };
            if ok_thin {
                diameter_hits += 1;
                continue;
            }
            let same_cells = self.identity_tail_start(&y)?.is_some_and(|my| my <= k) && self.word_along(&y, k)? == x_word;
            let close = d_e(self, &c, &y)?.to_f64() < eps_f;
            if same_cells && close {
                hausdorff_hits += 1;
            } else {
                verified = false;
            }
        }
        Ok(DpsWitness { k, cylinder, samples, diameter_hits, hausdorff_hits, verified })
    }
}

/// Inverse of an invertible affine map.
pub fn invert(f: &AffineMap) -> Option<AffineMap> {
    let d = f.dim();
    let mut cols = Vec::with_capacity(d);
    for j in 0..d {
        let e: Vec<BigRational> = (0..d).map(|i| if i == j { q(1) } else { q(0) }).collect();
        cols.push(linalg::solve(&f.matrix, &e)?);
    }
    let inv_m: Vec<Vec<BigRational>> = (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect();
    let shift = AffineMap { matrix: inv_m.clone(), offset: vec![BigRational::zero(); d] }.apply(&f.offset);
    Some(AffineMap { matrix: inv_m, offset: shift.into_iter().map(|v| -v).collect() })
}

/// Nearest `f64` coordinates of an exact point.
pub fn point_f64(p: &[BigRational]) -> Vec<f64> {
    p.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
}
