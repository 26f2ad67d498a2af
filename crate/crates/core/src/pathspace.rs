//! Finite and lazily infinite paths, the path-space ultrametric, tail
//! equivalence and the filtration by agreement level.
//!
//! An infinite path is a finite prefix plus a tail descriptor. Paths are
//! always compared through their canonical form: over stationary diagrams
//! every tail becomes a primitive periodic block of edges starting as early
//! as possible, so two descriptors denote the same path iff their canonical
//! forms are equal. Over odometer diagrams the extremal and identity tails
//! keep their kind, since their edge indices grow with the level.

use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One};

use crate::diagram::{BratteliDiagram, Extremal, Growth};
use crate::error::{Error, Result};

/// Supplies the diagram a path lives in plus whatever extra structure
/// tail descriptors may refer to.
pub trait PathContext {
    fn diagram(&self) -> &BratteliDiagram;

    /// Image in `E_level` of edge `f_edge` of `F_level` under embedding `side`.
    fn embedded_edge(&self, side: usize, level: usize, f_edge: usize) -> Result<usize> {
        let _ = (side, level, f_edge);
        Err(Error::TailUndecidable("no embedding pair in scope".into()))
    }

    /// The lower diagram of an embedding pair, if any.
    fn embedded_diagram(&self) -> Option<&BratteliDiagram> {
        None
    }

    /// Edge of the distinguished identity path at `level`.
    fn identity_edge(&self, level: usize) -> Result<usize> {
        let _ = level;
        Err(Error::TailUndecidable("no identity path in scope".into()))
    }

    /// Level from which all tail data repeat (stationary contexts only).
    fn stationary_level(&self) -> Option<usize> {
        self.diagram().stationary_from()
    }
}

impl PathContext for BratteliDiagram {
    fn diagram(&self) -> &BratteliDiagram {
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TailSpec {
    /// Follows the all-maximal path.
    AllMax,
    /// Follows the all-minimal path.
    AllMin,
    /// Repeats a block of edge indices.
    Periodic(Vec<usize>),
    /// Image under embedding `side` of a periodic block of lower-diagram edges.
    Embedded { side: usize, block: Vec<usize> },
    /// Follows the identity path of an edge-function assignment.
    AllIdentity,
}

/// Infinite path: explicit edges at levels `1..=prefix.len()`, then the tail.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LazyPath {
    pub prefix: Vec<usize>,
    pub tail: TailSpec,
}

impl LazyPath {
    pub fn new(prefix: Vec<usize>, tail: TailSpec) -> Self {
        LazyPath { prefix, tail }
    }

    pub fn periodic(prefix: Vec<usize>, block: Vec<usize>) -> Self {
        LazyPath { prefix, tail: TailSpec::Periodic(block) }
    }

    pub fn embedded(prefix: Vec<usize>, side: usize, block: Vec<usize>) -> Self {
        LazyPath { prefix, tail: TailSpec::Embedded { side, block } }
    }
}

fn fmt_list(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(","))
}

impl fmt::Display for LazyPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prefix={} tail=", fmt_list(&self.prefix))?;
        match &self.tail {
            TailSpec::AllMax => write!(f, "allmax"),
            TailSpec::AllMin => write!(f, "allmin"),
            TailSpec::Periodic(b) => write!(f, "periodic:{}", fmt_list(b)),
            TailSpec::Embedded { side, block } => write!(f, "embedded:{side}:{}", fmt_list(block)),
            TailSpec::AllIdentity => write!(f, "identity"),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected [..] list, found {s:?}")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("bad index {t:?}: {e}"))))
        .collect()
}

impl FromStr for LazyPath {
    type Err = Error;

    /// Parses `prefix=[i,..] tail=allmax|allmin|periodic:[..]|embedded:j:[..]|identity`.
    fn from_str(s: &str) -> Result<Self> {
        let mut prefix = Vec::new();
        let mut tail = None;
        for tok in s.split_whitespace() {
            if let Some(r) = tok.strip_prefix("prefix=") {
                prefix = parse_list(r)?;
            } else if let Some(r) = tok.strip_prefix("tail=") {
                tail = Some(match r {
                    "allmax" => TailSpec::AllMax,
                    "allmin" => TailSpec::AllMin,
                    "identity" => TailSpec::AllIdentity,
                    _ => {
                        if let Some(b) = r.strip_prefix("periodic:") {
                            TailSpec::Periodic(parse_list(b)?)
                        } else if let Some(b) = r.strip_prefix("embedded:") {
                            let (side, block) = b
                                .split_once(':')
                                .ok_or_else(|| Error::Parse(format!("bad embedded tail {r:?}")))?;
                            let side = side.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?;
                            TailSpec::Embedded { side, block: parse_list(block)? }
                        } else {
                            return Err(Error::Parse(format!("unknown tail {r:?}")));
                        }
                    }
                });
            } else {
                return Err(Error::Parse(format!("unexpected token {tok:?}")));
            }
        }
        let tail = tail.ok_or_else(|| Error::Parse("missing tail=".into()))?;
        Ok(LazyPath { prefix, tail })
    }
}

/// Exact value of `d_E`: zero, or `2^-n` where `n` edges agree initially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathDistance {
    Zero,
    Pow(usize),
}

impl PathDistance {
    pub fn to_rational(self) -> BigRational {
        match self {
            PathDistance::Zero => BigRational::from_integer(BigInt::from(0)),
            PathDistance::Pow(n) => BigRational::new(BigInt::one(), BigInt::from(2).pow(n as u32)),
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            PathDistance::Zero => 0.0,
            PathDistance::Pow(n) => 0.5f64.powi(n as i32),
        }
    }

    /// Larger of two distances.
    pub fn max(self, other: PathDistance) -> PathDistance {
        match (self, other) {
            (PathDistance::Zero, d) | (d, PathDistance::Zero) => d,
            (PathDistance::Pow(a), PathDistance::Pow(b)) => PathDistance::Pow(a.min(b)),
        }
    }
}

impl PartialOrd for PathDistance {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PathDistance {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (PathDistance::Zero, PathDistance::Zero) => Ordering::Equal,
            (PathDistance::Zero, _) => Ordering::Less,
            (_, PathDistance::Zero) => Ordering::Greater,
            (PathDistance::Pow(a), PathDistance::Pow(b)) => b.cmp(a),
        }
    }
}

impl fmt::Display for PathDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathDistance::Zero => write!(f, "0"),
            PathDistance::Pow(0) => write!(f, "1"),
            PathDistance::Pow(n) => write!(f, "1/{}", BigInt::from(2).pow(*n as u32)),
        }
    }
}

/// Checks that `p` is a composable root path.
pub fn check_finite_path(d: &BratteliDiagram, p: &[usize]) -> Result<()> {
    let mut v = 0;
    for (i, &e) in p.iter().enumerate() {
        let edge = d.try_edge(i + 1, e)?;
        if edge.source != v {
            return Err(Error::InvalidPath(format!(
                "edge {e} at level {} starts at vertex {}, expected {v}",
                i + 1,
                edge.source
            )));
        }
        v = edge.target;
    }
    Ok(())
}

/// Target vertex of a root path (the root for the empty path).
pub fn end_vertex(d: &BratteliDiagram, p: &[usize]) -> usize {
    p.last().map_or(0, |&e| d.edge(p.len(), e).target)
}

fn primitive_block(b: &[usize]) -> Vec<usize> {
    let p = b.len();
    for d in 1..=p {
        if p % d == 0 && (0..p).all(|i| b[i] == b[i % d]) {
            return b[..d].to_vec();
        }
    }
    b.to_vec()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn odometer_edge(d: &BratteliDiagram, tail: &TailSpec, prefix_len: usize, n: usize, ctx_id: Option<usize>) -> usize {
    match tail {
        TailSpec::AllMax => d.edge_count(n) - 1,
        TailSpec::AllMin => 0,
        TailSpec::Periodic(b) => b[(n - prefix_len - 1) % b.len()],
        TailSpec::AllIdentity => ctx_id.expect("identity edge resolved"),
        TailSpec::Embedded { .. } => unreachable!("rejected during canonicalization"),
    }
}

/// Brings `x` to canonical form, validating composability.
pub fn canonicalize<C: PathContext + ?Sized>(ctx: &C, x: &LazyPath) -> Result<LazyPath> {
    let d = ctx.diagram();
    check_finite_path(d, &x.prefix)?;
    match d.growth() {
        Growth::Finite => Err(Error::TailUndecidable("finite diagrams carry no infinite paths".into())),
        Growth::Odometer { .. } => canonicalize_odometer(ctx, x),
        Growth::Stationary { .. } => canonicalize_stationary(ctx, x),
    }
}

fn canonicalize_odometer<C: PathContext + ?Sized>(ctx: &C, x: &LazyPath) -> Result<LazyPath> {
    let d = ctx.diagram();
    let mut prefix = x.prefix.clone();
    let mut tail = match &x.tail {
        TailSpec::Embedded { .. } => {
            return Err(Error::TailUndecidable("embedded tails need a stationary embedding pair".into()))
        }
        TailSpec::Periodic(b) => {
            if b.is_empty() {
                return Err(Error::InvalidPath("empty periodic block".into()));
            }
            let start = prefix.len() + 1;
            for (i, &e) in b.iter().enumerate() {
                if e >= d.edge_count(start + i) {
                    return Err(Error::InvalidPath(format!("edge {e} does not exist at level {}", start + i)));
                }
            }
            let b = primitive_block(b);
            if b == [0] {
                TailSpec::AllMin
            } else {
                TailSpec::Periodic(b)
            }
        }
        TailSpec::AllIdentity => {
            ctx.identity_edge(prefix.len() + 1)?;
            TailSpec::AllIdentity
        }
        t => t.clone(),
    };
    loop {
        let Some(&last) = prefix.last() else { break };
        let n = prefix.len();
        let predicted = match &tail {
            TailSpec::AllMax => d.edge_count(n) - 1,
            TailSpec::AllMin => 0,
            TailSpec::AllIdentity => ctx.identity_edge(n)?,
            TailSpec::Periodic(b) => *b.last().expect("nonempty"),
            TailSpec::Embedded { .. } => unreachable!(),
        };
        if last != predicted {
            break;
        }
        prefix.pop();
        if let TailSpec::Periodic(b) = &mut tail {
            b.rotate_right(1);
        }
    }
    Ok(LazyPath { prefix, tail })
}

fn canonicalize_stationary<C: PathContext + ?Sized>(ctx: &C, x: &LazyPath) -> Result<LazyPath> {
    let d = ctx.diagram();
    let from = d.stationary_from().expect("stationary");
    let ctx_level = ctx.stationary_level().unwrap_or(from).max(from);
    let mut q = x.prefix.clone();
    let block: Vec<usize> = match &x.tail {
        TailSpec::Periodic(b) => {
            if b.is_empty() {
                return Err(Error::InvalidPath("empty periodic block".into()));
            }
            if q.len() + 1 < from {
                return Err(Error::TailUndecidable(format!(
                    "periodic tail starting at level {} lies before the repeating level {from}",
                    q.len() + 1
                )));
            }
            b.clone()
        }
        TailSpec::AllMax | TailSpec::AllMin => {
            let kind = if x.tail == TailSpec::AllMax { Extremal::Max } else { Extremal::Min };
            let ext = d
                .extremal_path(kind)
                .ok_or_else(|| Error::NotProperlyOrdered(format!("{kind:?} path is not unique")))?;
            if q.len() < ext.prefix.len() {
                q.extend_from_slice(&ext.prefix[q.len()..]);
            }
            ext.cycle
        }
        TailSpec::Embedded { side, block } => {
            if block.is_empty() {
                return Err(Error::InvalidPath("empty embedded block".into()));
            }
            if *side > 1 {
                return Err(Error::InvalidPath(format!("embedding side {side} is not 0 or 1")));
            }
            let f = ctx
                .embedded_diagram()
                .ok_or_else(|| Error::TailUndecidable("no embedding pair in scope".into()))?;
            let f_from = f
                .stationary_from()
                .ok_or_else(|| Error::TailUndecidable("lower diagram is not stationary".into()))?;
            let start = q.len() + 1;
            if start < f_from {
                return Err(Error::TailUndecidable(format!(
                    "embedded tail starting at level {start} lies before the repeating level {f_from}"
                )));
            }
            let s = start.max(ctx_level);
            let p = block.len();
            for level in start..s {
                q.push(ctx.embedded_edge(*side, level, block[(level - start) % p])?);
            }
            (s..s + p)
                .map(|level| ctx.embedded_edge(*side, level, block[(level - start) % p]))
                .collect::<Result<_>>()?
        }
        TailSpec::AllIdentity => {
            let start = q.len() + 1;
            let s = start.max(ctx_level);
            for level in start..s {
                q.push(ctx.identity_edge(level)?);
            }
            vec![ctx.identity_edge(s)?]
        }
    };
    // the block is read at levels >= q.len()+1 >= from, all copies of the repeating level
    let start = q.len() + 1;
    let mut v = end_vertex_checked(d, &q)?;
    for (i, &e) in block.iter().enumerate() {
        let edge = d.try_edge(start.max(from), e)?;
        if edge.source != v {
            return Err(Error::InvalidPath(format!(
                "tail edge {e} at level {} starts at vertex {}, expected {v}",
                start + i,
                edge.source
            )));
        }
        v = edge.target;
    }
    let first = d.edge(from, block[0]);
    if v != first.source {
        return Err(Error::InvalidPath("periodic block does not close up".into()));
    }
    let mut block = primitive_block(&block);
    while q.len() >= from {
        let last = *q.last().expect("nonempty");
        if last != *block.last().expect("nonempty") {
            break;
        }
        q.pop();
        block.rotate_right(1);
    }
    Ok(LazyPath { prefix: q, tail: TailSpec::Periodic(block) })
}

fn end_vertex_checked(d: &BratteliDiagram, p: &[usize]) -> Result<usize> {
    check_finite_path(d, p)?;
    Ok(end_vertex(d, p))
}

/// Edge at level `n` of an already canonical path.
pub fn edge_at_canonical<C: PathContext + ?Sized>(ctx: &C, x: &LazyPath, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::LevelOutOfRange { level: 0, depth: 0 });
    }
    if n <= x.prefix.len() {
        return Ok(x.prefix[n - 1]);
    }
    let d = ctx.diagram();
    match (&x.tail, d.growth()) {
        (TailSpec::Periodic(b), _) => Ok(b[(n - x.prefix.len() - 1) % b.len()]),
        (TailSpec::AllIdentity, _) => ctx.identity_edge(n),
        (t, Growth::Odometer { .. }) => Ok(odometer_edge(d, t, x.prefix.len(), n, None)),
        _ => Err(Error::TailUndecidable("path is not in canonical form".into())),
    }
}

/// Materializes the edge at level `n >= 1`.
pub fn edge_at<C: PathContext + ?Sized>(ctx: &C, x: &LazyPath, n: usize) -> Result<usize> {
    let c = canonicalize(ctx, x)?;
    edge_at_canonical(ctx, &c, n)
}

/// First `n` edges of a canonical path.
pub fn materialize<C: PathContext + ?Sized>(ctx: &C, x: &LazyPath, n: usize) -> Result<Vec<usize>> {
    (1..=n).map(|k| edge_at_canonical(ctx, x, k)).collect()
}

fn period(x: &LazyPath) -> usize {
    match &x.tail {
        TailSpec::Periodic(b) => b.len(),
        _ => 1,
    }
}

// whether agreement over one common window past both prefixes implies
// agreement forever
fn tails_lockstep(x: &LazyPath, y: &LazyPath) -> bool {
    matches!(
        (&x.tail, &y.tail),
        (TailSpec::Periodic(_), TailSpec::Periodic(_))
            | (TailSpec::AllMax, TailSpec::AllMax)
            | (TailSpec::AllMin, TailSpec::AllMin)
            | (TailSpec::AllIdentity, TailSpec::AllIdentity)
    )
}

// bound on levels scanned past the common window when tail kinds differ;
// differing odometer tails separate within a couple of levels
const DIVERGENCE_SCAN: usize = 64;

/// First level at which two canonical paths differ, or `None` if equal.
pub fn first_difference_canonical<C: PathContext + ?Sized>(
    ctx: &C,
    x: &LazyPath,
    y: &LazyPath,
) -> Result<Option<usize>> {
    let window = x.prefix.len().max(y.prefix.len()) + lcm(period(x), period(y));
    for n in 1..=window {
        if edge_at_canonical(ctx, x, n)? != edge_at_canonical(ctx, y, n)? {
            return Ok(Some(n));
        }
    }
    if tails_lockstep(x, y) {
        return Ok(None);
    }
    for n in window + 1..=window + DIVERGENCE_SCAN {
        if edge_at_canonical(ctx, x, n)? != edge_at_canonical(ctx, y, n)? {
            return Ok(Some(n));
        }
    }
    Err(Error::TailUndecidable("tails of different kinds did not separate".into()))
}

/// Path-space distance `d_E`.
pub fn d_e<C: PathContext + ?Sized>(ctx: &C, x: &LazyPath, y: &LazyPath) -> Result<PathDistance> {
    let x = canonicalize(ctx, x)?;
    let y = canonicalize(ctx, y)?;
    Ok(match first_difference_canonical(ctx, &x, &y)? {
        None => PathDistance::Zero,
        Some(n) => PathDistance::Pow(n - 1),
    })
}

pub fn paths_equal<C: PathContext + ?Sized>(ctx: &C, x: &LazyPath, y: &LazyPath) -> Result<bool> {
    Ok(canonicalize(ctx, x)? == canonicalize(ctx, y)?)
}

/// Least `n` with `x_k = y_k` for all `k >= n`, or `None` when the paths are
/// not tail equivalent.
pub fn tail_equivalent<C: PathContext + ?Sized>(ctx: &C, x: &LazyPath, y: &LazyPath) -> Result<Option<usize>> {
    let x = canonicalize(ctx, x)?;
    let y = canonicalize(ctx, y)?;
    tail_equivalent_canonical(ctx, &x, &y)
}

pub fn tail_equivalent_canonical<C: PathContext + ?Sized>(
    ctx: &C,
    x: &LazyPath,
    y: &LazyPath,
) -> Result<Option<usize>> {
    let base = x.prefix.len().max(y.prefix.len());
    if !tails_lockstep(x, y) {
        return Ok(None);
    }
    let window = lcm(period(x), period(y));
    for n in base + 1..=base + window {
        if edge_at_canonical(ctx, x, n)? != edge_at_canonical(ctx, y, n)? {
            return Ok(None);
        }
    }
    let mut n = base + 1;
    while n > 1 && edge_at_canonical(ctx, x, n - 1)? == edge_at_canonical(ctx, y, n - 1)? {
        n -= 1;
    }
    Ok(Some(n))
}

/// Membership of `(x, y)` in `R_n`.
pub fn in_r_n<C: PathContext + ?Sized>(ctx: &C, x: &LazyPath, y: &LazyPath, n: usize) -> Result<bool> {
    Ok(tail_equivalent(ctx, x, y)?.is_some_and(|a| a <= n))
}

/// The metric on pairs: the larger coordinate distance when both pairs lie
/// in the same shell `R_{n+1} - R_n`, and 1 otherwise.
pub fn d_e2<C: PathContext + ?Sized>(
    ctx: &C,
    a: (&LazyPath, &LazyPath),
    b: (&LazyPath, &LazyPath),
) -> Result<PathDistance> {
    let sa = tail_equivalent(ctx, a.0, a.1)?
        .ok_or_else(|| Error::InvalidPath("first pair is not tail equivalent".into()))?;
    let sb = tail_equivalent(ctx, b.0, b.1)?
        .ok_or_else(|| Error::InvalidPath("second pair is not tail equivalent".into()))?;
    if sa != sb {
        return Ok(PathDistance::Pow(0));
    }
    Ok(d_e(ctx, a.0, b.0)?.max(d_e(ctx, a.1, b.1)?))
}

/// Whether `x` extends the finite path `p`.
pub fn in_cylinder<C: PathContext + ?Sized>(ctx: &C, x: &LazyPath, p: &[usize]) -> Result<bool> {
    let c = canonicalize(ctx, x)?;
    Ok(materialize(ctx, &c, p.len())? == p)
}

/// All root paths of length `n` in lexicographic order of edge indices.
pub fn enumerate_paths(d: &BratteliDiagram, n: usize) -> Result<Vec<Vec<usize>>> {
    if n > 0 {
        d.check_level(n)?;
    }
    let mut out = Vec::new();
    let mut stack = vec![Vec::new()];
    while let Some(p) = stack.pop() {
        if p.len() == n {
            out.push(p);
            continue;
        }
        let level = p.len() + 1;
        let v = end_vertex(d, &p);
        for &e in d.out_edges(level, v).iter().rev() {
            let mut next = p.clone();
            next.push(e);
            stack.push(next);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn per(prefix: &[usize], block: &[usize]) -> LazyPath {
        LazyPath::periodic(prefix.to_vec(), block.to_vec())
    }

    #[test]
    fn edge_materialization() {
        let d = catalog::two_infinity();
        let x = per(&[0], &[1]);
        assert_eq!(edge_at(&d, &x, 5).unwrap(), 1);
        let m = LazyPath::new(vec![0, 0], TailSpec::AllMax);
        assert_eq!(edge_at(&d, &m, 7).unwrap(), 1);
        assert_eq!(edge_at(&d, &m, 2).unwrap(), 0);
    }

    #[test]
    fn canonical_form_is_shortest() {
        let d = catalog::two_infinity();
        let x = canonicalize(&d, &per(&[1, 0, 0, 0], &[0, 0])).unwrap();
        assert_eq!(x, per(&[1], &[0]));
        let y = canonicalize(&d, &per(&[0, 1, 0], &[1, 0])).unwrap();
        assert_eq!(y, per(&[], &[0, 1]));
        let m = canonicalize(&d, &LazyPath::new(vec![], TailSpec::AllMax)).unwrap();
        assert_eq!(m, per(&[], &[1]));
    }

    #[test]
    fn distance_examples() {
        let d = catalog::two_infinity();
        let x = per(&[0, 1, 1, 0], &[0]);
        assert_eq!(d_e(&d, &x, &x).unwrap(), PathDistance::Zero);
        let y = per(&[0, 1, 1, 1], &[0]);
        assert_eq!(d_e(&d, &x, &y).unwrap(), PathDistance::Pow(3));
        assert_eq!(d_e(&d, &x, &y).unwrap().to_rational(), BigRational::new(1.into(), 8.into()));
        let z = per(&[1], &[0]);
        assert_eq!(d_e(&d, &x, &z).unwrap().to_rational(), BigRational::one());
    }

    #[test]
    fn tail_equivalence_examples() {
        let d = catalog::two_infinity();
        let a = per(&[1, 0], &[0]);
        let b = per(&[0, 1], &[0]);
        assert_eq!(tail_equivalent(&d, &a, &a).unwrap(), Some(1));
        assert_eq!(tail_equivalent(&d, &a, &b).unwrap(), Some(3));
        assert!(!in_r_n(&d, &a, &b, 2).unwrap());
        assert!(in_r_n(&d, &a, &b, 3).unwrap());
        let mx = LazyPath::new(vec![], TailSpec::AllMax);
        let mn = LazyPath::new(vec![], TailSpec::AllMin);
        assert_eq!(tail_equivalent(&d, &mx, &mn).unwrap(), None);
        assert!(!in_r_n(&d, &mx, &mn, 100).unwrap());
    }

    #[test]
    fn pair_metric() {
        let d = catalog::two_infinity();
        let x = per(&[1, 0], &[0]);
        let y = per(&[0, 1], &[0]);
        assert_eq!(d_e2(&d, (&x, &y), (&x, &y)).unwrap(), PathDistance::Zero);
        // both in R_2 - R_1: they agree from level 2
        let a = (per(&[1, 0, 0, 0], &[0]), per(&[0, 0, 0, 0], &[0]));
        let b = (per(&[1, 0, 1, 0], &[0]), per(&[0, 0, 0, 1], &[0]));
        let shell_a = tail_equivalent(&d, &a.0, &a.1).unwrap();
        let shell_b = tail_equivalent(&d, &b.0, &b.1).unwrap();
        assert_eq!(shell_a, Some(2));
        assert_eq!(shell_b, Some(5));
        assert_eq!(d_e2(&d, (&a.0, &a.1), (&b.0, &b.1)).unwrap(), PathDistance::Pow(0));
        let c = (per(&[1, 0, 1], &[0]), per(&[0, 0, 0, 1], &[0]));
        let c2 = (per(&[1, 0, 0, 1], &[0]), per(&[0, 0, 1], &[0]));
        assert_eq!(tail_equivalent(&d, &c.0, &c.1).unwrap(), tail_equivalent(&d, &c2.0, &c2.1).unwrap());
        assert_eq!(d_e2(&d, (&c.0, &c.1), (&c2.0, &c2.1)).unwrap(), PathDistance::Pow(2));
    }

    #[test]
    fn path_enumeration() {
        assert_eq!(enumerate_paths(&catalog::two_infinity(), 3).unwrap().len(), 8);
        assert_eq!(enumerate_paths(&catalog::k_infinity(3), 2).unwrap().len(), 9);
        let f = catalog::fibonacci();
        let counts = f.path_counts(5).unwrap();
        let total: BigInt = counts.iter().sum();
        assert_eq!(BigInt::from(enumerate_paths(&f, 5).unwrap().len()), total);
        let p = enumerate_paths(&catalog::two_infinity(), 2).unwrap();
        assert_eq!(p, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn literal_round_trip() {
        for s in [
            "prefix=[1,0] tail=periodic:[0]",
            "prefix=[] tail=allmax",
            "prefix=[2] tail=embedded:1:[0,0]",
            "prefix=[] tail=identity",
            "prefix=[3] tail=allmin",
        ] {
            let p: LazyPath = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("prefix=[1 tail=allmax".parse::<LazyPath>().is_err());
        assert!("prefix=[1]".parse::<LazyPath>().is_err());
    }

    #[test]
    fn odometer_tails() {
        let d = catalog::odometer_catalog(1);
        let x = LazyPath::new(vec![2], TailSpec::AllMax);
        // level n has 2^n + 1 edges, so the maximal edge at level 1 is 2
        assert_eq!(canonicalize(&d, &x).unwrap(), LazyPath::new(vec![], TailSpec::AllMax));
        let y = LazyPath::new(vec![], TailSpec::AllMin);
        assert_eq!(d_e(&d, &x, &y).unwrap(), PathDistance::Pow(0));
        assert_eq!(tail_equivalent(&d, &x, &y).unwrap(), None);
        assert_eq!(canonicalize(&d, &per(&[0], &[0])).unwrap(), y);
    }

    #[test]
    fn composability_enforced() {
        let f = catalog::fibonacci();
        assert!(check_finite_path(&f, &[1, 1]).is_ok());
        assert!(check_finite_path(&f, &[0, 1]).is_err());
        assert!(check_finite_path(&catalog::two_infinity(), &[2]).is_err());
        assert!(canonicalize(&f, &per(&[0], &[2])).is_err());
    }
}
