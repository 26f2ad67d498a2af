//! Dimension groups as direct limits of `Z^{V_n}` along incidence matrices:
//! element arithmetic, equality, positivity, the order unit, traces, and a
//! small symbolic language for the abelian groups that show up in reports.

use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::diagram::{BratteliDiagram, Growth};
use crate::error::{Error, Result};
use crate::linalg::{self, QMatrix};

/// Element of the dimension group, represented at a level.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DGElement {
    pub level: usize,
    pub vector: Vec<BigInt>,
}

impl DGElement {
    pub fn new(level: usize, vector: Vec<BigInt>) -> Self {
        DGElement { level, vector }
    }

    pub fn from_i64(level: usize, vector: &[i64]) -> Self {
        DGElement { level, vector: vector.iter().map(|&x| BigInt::from(x)).collect() }
    }

    pub fn is_zero_vector(&self) -> bool {
        self.vector.iter().all(Zero::is_zero)
    }

    fn check(&self, d: &BratteliDiagram) -> Result<()> {
        if self.level > 0 {
            d.check_level(self.level)?;
        }
        if self.vector.len() != d.vertex_count(self.level) {
            return Err(Error::DimGroup(format!(
                "vector of length {} at level {} with {} vertices",
                self.vector.len(),
                self.level,
                d.vertex_count(self.level)
            )));
        }
        Ok(())
    }
}

impl fmt::Display for DGElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.vector.iter().map(|x| x.to_string()).collect();
        write!(f, "{}:[{}]", self.level, items.join(","))
    }
}

impl std::str::FromStr for DGElement {
    type Err = Error;

    /// Parses `level:[a,b,...]`.
    fn from_str(s: &str) -> Result<Self> {
        let (lvl, vec) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected level:[..], found {s:?}")))?;
        let level = lvl.trim().parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?;
        let inner = vec
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("expected [..], found {vec:?}")))?;
        let vector = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|t| t.trim().parse::<BigInt>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<_>>()?
        };
        Ok(DGElement { level, vector })
    }
}

/// Applies the connecting maps up to `to_level`.
pub fn push_forward(d: &BratteliDiagram, e: &DGElement, to_level: usize) -> Result<DGElement> {
    e.check(d)?;
    if to_level < e.level {
        return Err(Error::DimGroup(format!("cannot push level {} back to {to_level}", e.level)));
    }
    let mut v = e.vector.clone();
    for n in e.level + 1..=to_level {
        v = linalg::apply_int(&d.incidence_matrix(n)?.entries, &v);
    }
    Ok(DGElement { level: to_level, vector: v })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equality {
    Equal,
    NotEqual,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positivity {
    Positive,
    Zero,
    NotPositive,
    Unknown,
}

/// Whether every connecting map from level `from` on is injective, when decidable.
fn maps_injective_after(d: &BratteliDiagram, from: usize) -> Option<bool> {
    let injective = |n: usize| -> Result<bool> {
        let m = d.incidence_matrix(n)?;
        Ok(linalg::rank(&linalg::to_q(&m.entries)) == d.vertex_count(n - 1))
    };
    match d.growth() {
        Growth::Odometer { .. } => Some(true),
        Growth::Finite => {
            let depth = d.explicit_depth();
            (from + 1..=depth).map(injective).collect::<Result<Vec<_>>>().ok().map(|v| v.iter().all(|&b| b))
        }
        Growth::Stationary { from: l } => {
            let top = l.max(from + 1);
            (from + 1..=top).map(injective).collect::<Result<Vec<_>>>().ok().map(|v| v.iter().all(|&b| b))
        }
    }
}

/// Direct-limit equality, checked at the common level and up to
/// `extra_depth` further levels.
pub fn dg_equal(d: &BratteliDiagram, a: &DGElement, b: &DGElement, extra_depth: usize) -> Result<Equality> {
    let top = a.level.max(b.level);
    let pa = push_forward(d, a, top)?;
    let pb = push_forward(d, b, top)?;
    let diff = DGElement {
        level: top,
        vector: pa.vector.iter().zip(&pb.vector).map(|(x, y)| x - y).collect(),
    };
    let mut cur = diff;
    for step in 0..=extra_depth {
        if cur.is_zero_vector() {
            return Ok(Equality::Equal);
        }
        if maps_injective_after(d, cur.level) == Some(true) {
            return Ok(Equality::NotEqual);
        }
        if step == extra_depth || !d.has_level(cur.level + 1) {
            break;
        }
        cur = push_forward(d, &cur, cur.level + 1)?;
    }
    if d.depth() == Some(cur.level) {
        return Ok(Equality::NotEqual);
    }
    Ok(Equality::Unknown)
}

/// Class of the unit: the number of root paths into each vertex.
pub fn order_unit(d: &BratteliDiagram, level: usize) -> Result<DGElement> {
    Ok(DGElement { level, vector: d.path_counts(level)? })
}

pub const DEFAULT_DEPTH_CAP: usize = 32;

/// Semi-decision of membership in the positive cone.
pub fn is_positive(d: &BratteliDiagram, e: &DGElement, depth_cap: usize) -> Result<Positivity> {
    e.check(d)?;
    if e.is_zero_vector() {
        return Ok(Positivity::Zero);
    }
    // nonzero vectors of one sign keep their sign and stay nonzero, since
    // every vertex emits an edge
    if linalg::is_nonneg(&e.vector) {
        return Ok(Positivity::Positive);
    }
    if linalg::is_nonpos(&e.vector) {
        return Ok(Positivity::NotPositive);
    }
    if let Some(sign) = perron_sign(d, e)? {
        match sign {
            1 => return Ok(Positivity::Positive),
            -1 => return Ok(Positivity::NotPositive),
            _ => {}
        }
    }
    let mut cur = e.clone();
    for _ in 0..depth_cap {
        if !d.has_level(cur.level + 1) {
            break;
        }
        cur = push_forward(d, &cur, cur.level + 1)?;
        if cur.is_zero_vector() {
            return Ok(Positivity::Zero);
        }
        if linalg::is_nonneg(&cur.vector) {
            return Ok(Positivity::Positive);
        }
        if linalg::is_nonpos(&cur.vector) {
            return Ok(Positivity::NotPositive);
        }
    }
    if d.depth() == Some(cur.level) {
        return Ok(Positivity::NotPositive);
    }
    // a zero Perron pairing on a primitive block means an infinitesimal,
    // which is never positive once the maps are injective
    if perron_sign(d, e)? == Some(0) && maps_injective_after(d, e.level) == Some(true) {
        return Ok(Positivity::NotPositive);
    }
    Ok(Positivity::Unknown)
}

// sign of the pairing with the unique trace of a primitive stationary diagram
fn perron_sign(d: &BratteliDiagram, e: &DGElement) -> Result<Option<i32>> {
    if !is_primitive_stationary(d) {
        return Ok(None);
    }
    let t = trace(d, TraceMode::Perron)?;
    let t = t.unique().expect("Perron trace is unique");
    let value = pairing(t, e)?;
    match t.error {
        None => Ok(Some(if value.is_positive() {
            1
        } else if value.is_negative() {
            -1
        } else {
            0
        })),
        Some(err) => {
            let mass: f64 = e.vector.iter().map(|x| x.abs().to_f64().unwrap_or(f64::INFINITY)).sum();
            let v = linalg::rational_to_f64(&value);
            if v.abs() > 4.0 * err * mass.max(1.0) {
                Ok(Some(if v > 0.0 { 1 } else { -1 }))
            } else {
                Ok(None)
            }
        }
    }
}

pub fn is_primitive_stationary(d: &BratteliDiagram) -> bool {
    match d.stationary_from() {
        Some(l) => d.incidence_matrix(l).is_ok_and(|m| linalg::is_primitive(&m.entries)),
        None => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    /// The unique trace of a primitive stationary diagram.
    Perron,
    /// Extreme points of the trace simplex of the diagram truncated at a depth.
    FiniteDepth(usize),
}

/// Weights `ν_n` on each level with `ν_0 = 1` and
/// `ν_{n-1}(v) = Σ_{e from v} ν_n(t(e))`. Levels past the stored ones
/// scale geometrically by `ratio`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceVector {
    pub levels: Vec<Vec<BigRational>>,
    pub ratio: Option<BigRational>,
    /// Bound on the entrywise error when the eigenvalue is irrational.
    pub error: Option<f64>,
}

impl TraceVector {
    pub fn at(&self, n: usize) -> Result<Vec<BigRational>> {
        if let Some(v) = self.levels.get(n) {
            return Ok(v.clone());
        }
        let ratio = self
            .ratio
            .as_ref()
            .ok_or_else(|| Error::DimGroup(format!("trace not materialized at level {n}")))?;
        let last = self.levels.len() - 1;
        let mut f = BigRational::one();
        for _ in last..n {
            f = &f * ratio;
        }
        Ok(self.levels[last].iter().map(|x| x * &f).collect())
    }

    pub fn is_exact(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trace {
    Unique(TraceVector),
    Simplex { depth: usize, vertices: Vec<TraceVector> },
}

impl Trace {
    /// The trace when there is exactly one.
    pub fn unique(&self) -> Option<&TraceVector> {
        match self {
            Trace::Unique(t) => Some(t),
            Trace::Simplex { vertices, .. } if vertices.len() == 1 => vertices.first(),
            Trace::Simplex { .. } => None,
        }
    }
}

fn pull_back(d: &BratteliDiagram, top: usize, nu_top: Vec<BigRational>) -> Result<Vec<Vec<BigRational>>> {
    let mut levels = vec![nu_top];
    for n in (1..=top).rev() {
        let at = linalg::transpose(&linalg::to_q(&d.incidence_matrix(n)?.entries));
        let next = levels.last().expect("nonempty");
        let prev: Vec<BigRational> = at
            .iter()
            .map(|row| row.iter().zip(next).fold(BigRational::zero(), |acc, (a, b)| acc + a * b))
            .collect();
        levels.push(prev);
    }
    levels.reverse();
    Ok(levels)
}

pub fn trace(d: &BratteliDiagram, mode: TraceMode) -> Result<Trace> {
    match mode {
        TraceMode::FiniteDepth(n) => {
            if n > 0 {
                d.check_level(n)?;
            }
            let counts = d.path_counts(n)?;
            let mut vertices = Vec::new();
            for (w, c) in counts.iter().enumerate() {
                let mut top = vec![BigRational::zero(); counts.len()];
                top[w] = BigRational::new(BigInt::one(), c.clone());
                vertices.push(TraceVector { levels: pull_back(d, n, top)?, ratio: None, error: None });
            }
            Ok(Trace::Simplex { depth: n, vertices })
        }
        TraceMode::Perron => perron_trace(d).map(Trace::Unique),
    }
}

fn perron_trace(d: &BratteliDiagram) -> Result<TraceVector> {
    if let Growth::Odometer { extra: 0, base } = d.growth() {
        let r = BigRational::new(BigInt::one(), BigInt::from(base));
        return Ok(TraceVector { levels: vec![vec![BigRational::one()]], ratio: Some(r), error: None });
    }
    let l = d
        .stationary_from()
        .ok_or_else(|| Error::DimGroup("Perron traces need a stationary diagram".into()))?;
    let b = d.incidence_matrix(l)?.entries;
    if !linalg::is_primitive(&b) {
        return Err(Error::DimGroup("repeating block is not primitive".into()));
    }
    let bt = linalg::to_q(&linalg::transpose(&b));
    let n = b.len();
    // rational Perron roots are integers between the extreme column sums
    let col_sums: Vec<u64> = (0..n).map(|j| b.iter().map(|r| r[j]).sum()).collect();
    let lo = *col_sums.iter().min().expect("nonempty");
    let hi = *col_sums.iter().max().expect("nonempty");
    for lambda in lo..=hi {
        let mut m: QMatrix = bt.clone();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = &row[i] - BigRational::from_integer(BigInt::from(lambda));
        }
        let ker = linalg::kernel(&m);
        if ker.len() == 1 {
            let mut v = ker[0].clone();
            if v.iter().all(|x| x.is_negative()) {
                v = v.into_iter().map(|x| -x).collect();
            }
            if v.iter().all(|x| x.is_positive()) {
                let mut levels = pull_back(d, l, v)?;
                let scale = levels[0][0].clone();
                for lv in &mut levels {
                    for x in lv.iter_mut() {
                        *x = &*x / &scale;
                    }
                }
                let ratio = BigRational::new(BigInt::one(), BigInt::from(lambda));
                return Ok(TraceVector { levels, ratio: Some(ratio), error: None });
            }
        }
    }
    // irrational eigenvalue: power iteration with a Collatz-Wielandt bound
    let btf: Vec<Vec<f64>> = linalg::transpose(&b).iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let mut x = vec![1.0f64; n];
    let mut lambda = 0.0;
    let mut gap = f64::INFINITY;
    for _ in 0..10_000 {
        let y: Vec<f64> = btf.iter().map(|r| r.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
        let ratios: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a / b).collect();
        let rmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let rmax = ratios.iter().cloned().fold(0.0, f64::max);
        lambda = 0.5 * (rmin + rmax);
        gap = rmax - rmin;
        let s: f64 = y.iter().sum();
        x = y.iter().map(|v| v / s).collect();
        if gap <= 1e-14 * lambda {
            break;
        }
    }
    let top: Vec<BigRational> = x.iter().map(|&v| linalg::f64_to_rational(v)).collect();
    let mut levels = pull_back(d, l, top)?;
    let scale = levels[0][0].clone();
    for lv in &mut levels {
        for x in lv.iter_mut() {
            *x = &*x / &scale;
        }
    }
    let error = (gap / lambda).max(f64::EPSILON * 16.0);
    Ok(TraceVector {
        levels,
        ratio: Some(linalg::f64_to_rational(1.0 / lambda)),
        error: Some(error.min(1e-12)),
    })
}

/// `Σ_v ν(v) · vector[v]` at the element's level.
pub fn pairing(t: &TraceVector, e: &DGElement) -> Result<BigRational> {
    let nu = t.at(e.level)?;
    if nu.len() != e.vector.len() {
        return Err(Error::DimGroup("trace and element sizes differ".into()));
    }
    Ok(nu
        .iter()
        .zip(&e.vector)
        .fold(BigRational::zero(), |acc, (a, b)| acc + a * BigRational::from_integer(b.clone())))
}

/// Checks `ν_{n-1} = A_n^T ν_n` exactly for all `n <= depth`.
pub fn trace_recursion_holds(d: &BratteliDiagram, t: &TraceVector, depth: usize) -> Result<bool> {
    if t.at(0)? != vec![BigRational::one()] {
        return Ok(false);
    }
    for n in 1..=depth {
        let at = linalg::transpose(&linalg::to_q(&d.incidence_matrix(n)?.entries));
        let upper = t.at(n)?;
        let lower = t.at(n - 1)?;
        let pulled: Vec<BigRational> = at
            .iter()
            .map(|row| row.iter().zip(&upper).fold(BigRational::zero(), |acc, (a, b)| acc + a * b))
            .collect();
        if pulled != lower {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Symbolic abelian groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupExpr {
    Zero,
    Z,
    /// `Z^k`.
    ZPow(usize),
    /// `Z[1/m]`; normalized to the squarefree radical of `m`.
    ZInv(u64),
    /// Countable direct sum of copies of `Z`.
    ZInf,
    DirectSum(Vec<GroupExpr>),
    /// Countable direct sum of copies of a group.
    InfiniteSum(Box<GroupExpr>),
    Quotient { group: Box<GroupExpr>, by: Box<GroupExpr> },
    /// Integer-valued continuous functions on a named space.
    ContFuncZ(String),
    /// Direct limit described by a presentation tag.
    Limit(String),
    /// An opaque named group.
    Named(String),
    Tensor(Box<GroupExpr>, Box<GroupExpr>),
}

impl GroupExpr {
    pub fn sum(parts: Vec<GroupExpr>) -> GroupExpr {
        GroupExpr::DirectSum(parts).normalize()
    }

    pub fn quotient(group: GroupExpr, by: GroupExpr) -> GroupExpr {
        GroupExpr::Quotient { group: Box::new(group), by: Box::new(by) }.normalize()
    }

    pub fn tensor(a: GroupExpr, b: GroupExpr) -> GroupExpr {
        GroupExpr::Tensor(Box::new(a), Box::new(b)).normalize()
    }

    /// Free abelian groups of finite or countable rank, including zero.
    pub fn is_free(&self) -> bool {
        match self.clone().normalize() {
            GroupExpr::Zero | GroupExpr::Z | GroupExpr::ZPow(_) | GroupExpr::ZInf => true,
            GroupExpr::DirectSum(parts) => parts.iter().all(GroupExpr::is_free),
            GroupExpr::InfiniteSum(g) => g.is_free(),
            _ => false,
        }
    }

    /// Rewrites to normal form; structurally equal normal forms denote the
    /// same group.
    pub fn normalize(self) -> GroupExpr {
        match self {
            GroupExpr::ZPow(0) => GroupExpr::Zero,
            GroupExpr::ZPow(1) => GroupExpr::Z,
            GroupExpr::ZInv(m) => match linalg::radical(m.max(1)) {
                1 => GroupExpr::Z,
                r => GroupExpr::ZInv(r),
            },
            GroupExpr::DirectSum(parts) => {
                let mut flat = Vec::new();
                for p in parts {
                    match p.normalize() {
                        GroupExpr::Zero => {}
                        GroupExpr::DirectSum(inner) => flat.extend(inner),
                        g => flat.push(g),
                    }
                }
                // merge finite-rank free summands into the first one
                let rank: usize = flat
                    .iter()
                    .map(|g| match g {
                        GroupExpr::Z => 1,
                        GroupExpr::ZPow(k) => *k,
                        _ => 0,
                    })
                    .sum();
                let mut out = Vec::new();
                let mut placed = false;
                for g in flat {
                    match g {
                        GroupExpr::Z | GroupExpr::ZPow(_) => {
                            if !placed {
                                out.push(GroupExpr::ZPow(rank).normalize());
                                placed = true;
                            }
                        }
                        g => out.push(g),
                    }
                }
                match out.len() {
                    0 => GroupExpr::Zero,
                    1 => out.pop().expect("one"),
                    _ => GroupExpr::DirectSum(out),
                }
            }
            GroupExpr::InfiniteSum(g) => match g.normalize() {
                GroupExpr::Zero => GroupExpr::Zero,
                GroupExpr::Z | GroupExpr::ZPow(_) | GroupExpr::ZInf => GroupExpr::ZInf,
                g => GroupExpr::InfiniteSum(Box::new(g)),
            },
            GroupExpr::Quotient { group, by } => {
                let group = group.normalize();
                let by = by.normalize();
                match (&group, &by) {
                    (_, GroupExpr::Zero) => group,
                    (g, b) if g == b && matches!(g, GroupExpr::Z | GroupExpr::ZPow(_)) => GroupExpr::Zero,
                    (GroupExpr::DirectSum(parts), b) if parts.first() == Some(b) => {
                        GroupExpr::DirectSum(parts[1..].to_vec()).normalize()
                    }
                    (GroupExpr::DirectSum(parts), GroupExpr::Z) if matches!(parts.first(), Some(GroupExpr::ZPow(_))) => {
                        let GroupExpr::ZPow(k) = parts[0] else { unreachable!() };
                        let mut rest = vec![GroupExpr::ZPow(k - 1)];
                        rest.extend_from_slice(&parts[1..]);
                        GroupExpr::DirectSum(rest).normalize()
                    }
                    (GroupExpr::ZPow(k), GroupExpr::Z) => GroupExpr::ZPow(k - 1).normalize(),
                    _ => GroupExpr::Quotient { group: Box::new(group), by: Box::new(by) },
                }
            }
            GroupExpr::Tensor(a, b) => tensor_normal(a.normalize(), b.normalize()),
            g => g,
        }
    }
}

fn tensor_normal(a: GroupExpr, b: GroupExpr) -> GroupExpr {
    use GroupExpr as G;
    match (a, b) {
        (G::Zero, _) | (_, G::Zero) => G::Zero,
        (G::Z, g) | (g, G::Z) => g,
        (G::ZPow(k), g) | (g, G::ZPow(k)) => G::DirectSum(vec![g; k]).normalize(),
        (G::ZInf, g) | (g, G::ZInf) => G::InfiniteSum(Box::new(g)).normalize(),
        (G::DirectSum(parts), g) | (g, G::DirectSum(parts)) => {
            G::DirectSum(parts.into_iter().map(|p| tensor_normal(p, g.clone())).collect()).normalize()
        }
        (G::InfiniteSum(h), g) | (g, G::InfiniteSum(h)) => G::InfiniteSum(Box::new(tensor_normal(*h, g))).normalize(),
        (G::ZInv(m), G::ZInv(k)) => G::ZInv(m.saturating_mul(k)).normalize(),
        (G::Quotient { group, by }, h) | (h, G::Quotient { group, by }) => G::Quotient {
            group: Box::new(tensor_normal(*group, h.clone())),
            by: Box::new(tensor_normal(*by, h)),
        }
        .normalize(),
        (a, b) => {
            // keep a fixed operand order so equal tensors compare equal
            let (x, y) = if format!("{a:?}") <= format!("{b:?}") { (a, b) } else { (b, a) };
            G::Tensor(Box::new(x), Box::new(y))
        }
    }
}

impl fmt::Display for GroupExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupExpr::Zero => write!(f, "0"),
            GroupExpr::Z => write!(f, "Z"),
            GroupExpr::ZPow(k) => write!(f, "Z^{k}"),
            GroupExpr::ZInv(m) => write!(f, "Z[1/{m}]"),
            GroupExpr::ZInf => write!(f, "Z^inf"),
            GroupExpr::DirectSum(parts) => {
                let s: Vec<String> = parts
                    .iter()
                    .map(|p| match p {
                        GroupExpr::DirectSum(_) | GroupExpr::Quotient { .. } | GroupExpr::Tensor(..) => format!("({p})"),
                        _ => p.to_string(),
                    })
                    .collect();
                write!(f, "{}", s.join(" (+) "))
            }
            GroupExpr::InfiniteSum(g) => write!(f, "(+)_inf ({g})"),
            GroupExpr::Quotient { group, by } => write!(f, "({group})/({by})"),
            GroupExpr::ContFuncZ(tag) => write!(f, "C({tag},Z)"),
            GroupExpr::Limit(tag) => write!(f, "lim[{tag}]"),
            GroupExpr::Named(s) => write!(f, "{s}"),
            GroupExpr::Tensor(a, b) => write!(f, "({a}) (x) ({b})"),
        }
    }
}

fn matrix_tag(m: &[Vec<u64>]) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    format!("[{}]", rows.join(","))
}

/// Symbolic identification of the dimension group for recognizable families.
pub fn identify_group(d: &BratteliDiagram) -> GroupExpr {
    match d.growth() {
        Growth::Finite => GroupExpr::ZPow(d.vertex_count(d.explicit_depth())).normalize(),
        Growth::Odometer { base, extra } => {
            if extra == 0 {
                GroupExpr::ZInv(base).normalize()
            } else {
                GroupExpr::Limit(format!("Z via x({base}^n+{extra})"))
            }
        }
        Growth::Stationary { from } => {
            let b = d.incidence_matrix(from).expect("stationary level exists").entries;
            if b.len() == 1 {
                return GroupExpr::ZInv(b[0][0].max(1)).normalize();
            }
            let det = linalg::determinant(&linalg::to_q(&b));
            if det.abs().is_one() {
                return GroupExpr::ZPow(b.len()).normalize();
            }
            GroupExpr::Limit(format!("Z^{} via {}", b.len(), matrix_tag(&b)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn push_forward_examples() {
        let d = catalog::two_infinity();
        assert_eq!(push_forward(&d, &DGElement::from_i64(1, &[1]), 2).unwrap(), DGElement::from_i64(2, &[2]));
        let f = catalog::fibonacci();
        let e = DGElement::from_i64(1, &[1, 0]);
        assert_eq!(push_forward(&f, &e, 3).unwrap(), DGElement::from_i64(3, &[2, 1]));
        assert_eq!(push_forward(&f, &e, 1).unwrap(), e);
        assert!(push_forward(&f, &DGElement::from_i64(2, &[1, 0]), 1).is_err());
    }

    #[test]
    fn equality_examples() {
        let d = catalog::two_infinity();
        let eq = |a: &[i64], la, b: &[i64], lb| {
            dg_equal(&d, &DGElement::from_i64(la, a), &DGElement::from_i64(lb, b), 4).unwrap()
        };
        assert_eq!(eq(&[1], 1, &[2], 2), Equality::Equal);
        assert_eq!(eq(&[1], 1, &[2], 1), Equality::NotEqual);
        let f = catalog::fibonacci();
        let r = dg_equal(&f, &DGElement::from_i64(1, &[1, 0]), &DGElement::from_i64(1, &[0, 1]), 8).unwrap();
        assert_eq!(r, Equality::NotEqual);
    }

    #[test]
    fn positivity_examples() {
        let d = catalog::two_infinity();
        assert_eq!(is_positive(&d, &DGElement::from_i64(1, &[1]), 32).unwrap(), Positivity::Positive);
        assert_eq!(is_positive(&d, &DGElement::from_i64(1, &[-1]), 32).unwrap(), Positivity::NotPositive);
        assert_eq!(is_positive(&d, &DGElement::from_i64(3, &[0]), 32).unwrap(), Positivity::Zero);
        let f = catalog::fibonacci();
        assert_eq!(is_positive(&f, &DGElement::from_i64(1, &[1, -1]), 32).unwrap(), Positivity::Positive);
        assert_eq!(is_positive(&f, &DGElement::from_i64(2, &[-2, 1]), 32).unwrap(), Positivity::NotPositive);
    }

    #[test]
    fn order_units() {
        let d = catalog::two_infinity();
        assert_eq!(order_unit(&d, 5).unwrap(), DGElement::from_i64(5, &[32]));
        assert_eq!(order_unit(&catalog::fibonacci(), 2).unwrap(), DGElement::from_i64(2, &[2, 1]));
        assert_eq!(order_unit(&catalog::k_infinity(3), 1).unwrap(), DGElement::from_i64(1, &[3]));
    }

    #[test]
    fn traces() {
        let d = catalog::two_infinity();
        let t = trace(&d, TraceMode::Perron).unwrap();
        let t = t.unique().unwrap();
        assert_eq!(t.at(3).unwrap(), vec![q(1, 8)]);
        assert_eq!(pairing(t, &DGElement::from_i64(1, &[1])).unwrap(), q(1, 2));
        assert_eq!(pairing(t, &order_unit(&d, 7).unwrap()).unwrap(), q(1, 1));
        assert_eq!(pairing(t, &DGElement::from_i64(4, &[0])).unwrap(), q(0, 1));
        let f = catalog::fibonacci();
        let tf = trace(&f, TraceMode::Perron).unwrap();
        let tf = tf.unique().unwrap();
        assert!(tf.error.is_some());
        let p = pairing(tf, &order_unit(&f, 6).unwrap()).unwrap();
        assert!((linalg::rational_to_f64(&p) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn finite_depth_simplex() {
        let f = catalog::fibonacci();
        let Trace::Simplex { vertices, .. } = trace(&f, TraceMode::FiniteDepth(4)).unwrap() else {
            panic!()
        };
        assert_eq!(vertices.len(), 2);
        for v in &vertices {
            assert!(trace_recursion_holds(&f, v, 4).unwrap());
            assert_eq!(pairing(v, &order_unit(&f, 4).unwrap()).unwrap(), q(1, 1));
        }
        let single = trace(&catalog::two_infinity(), TraceMode::FiniteDepth(3)).unwrap();
        assert_eq!(single.unique().unwrap().at(3).unwrap(), vec![q(1, 8)]);
    }

    #[test]
    fn non_primitive_perron_rejected() {
        assert!(trace(&catalog::figure_two(), TraceMode::Perron).is_err());
    }

    #[test]
    fn identification() {
        assert_eq!(identify_group(&catalog::two_infinity()), GroupExpr::ZInv(2));
        assert_eq!(identify_group(&catalog::k_infinity(4)), GroupExpr::ZInv(2));
        assert_eq!(identify_group(&catalog::k_infinity(6)), GroupExpr::ZInv(6));
        assert_eq!(identify_group(&catalog::single_edge()), GroupExpr::Z);
        assert_eq!(identify_group(&catalog::fibonacci()), GroupExpr::ZPow(2));
        assert!(matches!(identify_group(&catalog::figure_two()), GroupExpr::Limit(_)));
    }

    #[test]
    fn group_rewrites() {
        use GroupExpr as G;
        assert_eq!(G::tensor(G::Z, G::ZInv(2)), G::ZInv(2));
        assert_eq!(G::tensor(G::ZInf, G::ZInv(2)), G::InfiniteSum(Box::new(G::ZInv(2))));
        assert_eq!(G::tensor(G::ZInv(2), G::ZInf), G::tensor(G::ZInf, G::ZInv(2)));
        assert_eq!(G::tensor(G::ZInv(4), G::ZInv(3)), G::ZInv(6));
        assert_eq!(G::tensor(G::ZPow(2), G::ZInv(2)), G::sum(vec![G::ZInv(2), G::ZInv(2)]));
        assert_eq!(G::sum(vec![G::Z, G::Zero, G::Z, G::ZInf]), G::DirectSum(vec![G::ZPow(2), G::ZInf]));
        assert_eq!(G::quotient(G::Z, G::Z), G::Zero);
        assert_eq!(G::quotient(G::sum(vec![G::Z, G::ZInf]), G::Z), G::ZInf);
        assert_eq!(G::ZInv(1).normalize(), G::Z);
        assert!(G::sum(vec![G::Z, G::ZInf]).is_free());
        assert!(!G::ZInv(2).is_free());
        let q = G::quotient(G::ContFuncZ("C".into()), G::Z);
        assert_eq!(G::tensor(G::Z, q.clone()), q);
    }
}
