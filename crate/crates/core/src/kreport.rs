//! K-theory bookkeeping for concrete inputs: invariants of the factor of an
//! embedding pair, the two short exact sequences of a fibred extension, a
//! curated table of attractor K-groups, and the measure estimate showing
//! that the doubly embedded part is invisible to traces.

use std::fmt;
use std::str::FromStr;

use num::{BigRational, One, Zero};

use crate::dimgroup::{self, GroupExpr, TraceMode};
use crate::dps::DpsAssignment;
use crate::embedding::EmbeddingPair;
use crate::error::{Error, Result};
use crate::pathspace::{check_finite_path, end_vertex, PathContext};

/// Attractors whose K-groups are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttractorShape {
    /// The `m`-dimensional cube.
    Cube(usize),
    /// The full shift on `k` symbols.
    CantorShift(usize),
    Sierpinski,
    /// The unit cube with the open centre subcube removed at every scale.
    CarpetCube,
}

impl FromStr for AttractorShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |default: usize| -> Result<usize> {
            match arg {
                None => Ok(default),
                Some(a) => a.parse().map_err(|_| Error::Parse(format!("bad shape parameter {a:?}"))),
            }
        };
        match name {
            "cube" => Ok(AttractorShape::Cube(num(1)?)),
            "cantor" => Ok(AttractorShape::CantorShift(num(2)?)),
            "sierpinski" => Ok(AttractorShape::Sierpinski),
            "carpet-cube" => Ok(AttractorShape::CarpetCube),
            _ => Err(Error::KTheory(format!("unknown shape {s:?}"))),
        }
    }
}

impl fmt::Display for AttractorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttractorShape::Cube(m) => write!(f, "cube:{m}"),
            AttractorShape::CantorShift(k) => write!(f, "cantor:{k}"),
            AttractorShape::Sierpinski => write!(f, "sierpinski"),
            AttractorShape::CarpetCube => write!(f, "carpet-cube"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttractorK {
    pub k0: GroupExpr,
    pub k1: GroupExpr,
    pub contractible: bool,
}

pub fn attractor_catalog(shape: AttractorShape) -> Result<AttractorK> {
    use GroupExpr as G;
    let (k0, k1, contractible) = match shape {
        AttractorShape::Cube(0) => return Err(Error::KTheory("cube dimension must be positive".into())),
        AttractorShape::Cube(_) => (G::Z, G::Zero, true),
        AttractorShape::CantorShift(k) if k >= 2 => {
            let symbols = (0..k).map(|i| i.to_string()).collect::<Vec<_>>().join(",");
            (G::ContFuncZ(format!("{{{symbols}}}^N")), G::Zero, false)
        }
        AttractorShape::CantorShift(_) => return Err(Error::KTheory("a shift needs at least two symbols".into())),
        AttractorShape::Sierpinski => (G::Z, G::ZInf, false),
        AttractorShape::CarpetCube => (G::sum(vec![G::Z, G::ZInf]), G::Zero, false),
    };
    Ok(AttractorK { k0, k1, contractible })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Yes,
    No,
    Unknown,
}

/// `0 -> left -> middle -> right -> 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSequence {
    pub left: GroupExpr,
    pub middle: String,
    pub right: GroupExpr,
    pub split: Split,
    /// The left map is an isomorphism (the right term vanishes).
    pub left_iso: bool,
}

impl ExactSequence {
    fn new(left: GroupExpr, middle: &str, right: GroupExpr, contractible: bool) -> Self {
        let left_iso = right == GroupExpr::Zero;
        // splitting is claimed only for a free quotient or a contractible fibre
        let split = if left_iso || contractible || right.is_free() { Split::Yes } else { Split::Unknown };
        ExactSequence { left, middle: middle.to_string(), right, split, left_iso }
    }

    /// The middle group when the sequence splits.
    pub fn middle_group(&self) -> Option<GroupExpr> {
        match self.split {
            Split::Yes => Some(GroupExpr::sum(vec![self.left.clone(), self.right.clone()])),
            _ => None,
        }
    }
}

impl fmt::Display for ExactSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0 -> {} -> {} -> {} -> 0 (split: {:?})", self.left, self.middle, self.right, self.split)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantReport {
    pub k0: GroupExpr,
    pub k0_order: Option<String>,
    pub k1: GroupExpr,
    pub traces: Option<String>,
    pub sequences: Vec<ExactSequence>,
    pub notes: Vec<String>,
}

impl InvariantReport {
    /// `key: value` lines in a fixed order.
    pub fn lines(&self) -> Vec<(String, String)> {
        let mut out = vec![("K0".to_string(), self.k0.to_string())];
        if let Some(o) = &self.k0_order {
            out.push(("K0 order".into(), o.clone()));
        }
        out.push(("K1".into(), self.k1.to_string()));
        if let Some(t) = &self.traces {
            out.push(("traces".into(), t.clone()));
        }
        for (i, s) in self.sequences.iter().enumerate() {
            out.push((format!("sequence {i}"), s.to_string()));
        }
        for n in &self.notes {
            out.push(("note".into(), n.clone()));
        }
        out
    }
}

fn fmt_rationals(v: &[BigRational]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// K-theory of the quotient groupoid of an embedding pair: `K0` is the
/// dimension group of the large diagram and `K1` that of the embedded one.
pub fn factor_invariants(pair: &EmbeddingPair) -> Result<InvariantReport> {
    let report = pair.check_conditions();
    if let Some(bad) = report.outcomes.iter().find(|o| !o.passed) {
        return Err(Error::KTheory(format!(
            "embedding condition {} fails: {}",
            bad.condition,
            bad.witness.clone().unwrap_or_default()
        )));
    }
    let upper = pair.upper();
    let lower = pair.lower();
    let k0 = dimgroup::identify_group(upper);
    let k1 = dimgroup::identify_group(lower);
    let depth = pair.stable_level() + 1;
    let minimal = upper.has_full_edge_connections(depth);
    let traces = match dimgroup::trace(upper, TraceMode::Perron) {
        Ok(t) => match t.unique() {
            Some(tv) => Some(format!("unique, level 1 weights [{}]", fmt_rationals(&tv.at(1)?))),
            None => Some("several".into()),
        },
        Err(_) => None,
    };
    let mut notes = vec![format!("full edge connections: {minimal}")];
    let all_embedded =
        (1..=depth).all(|n| (0..upper.edge_count(n)).all(|e| pair.side_of(n, e).is_some()));
    if all_embedded {
        // every edge lies in one of the two copies: tensor with the type-2^inf Bunce-Deddens algebra
        // K1 of that algebra is K0 of the embedded one, which is K1 here by construction
        let consistent = GroupExpr::tensor(k1.clone(), GroupExpr::ZInv(2)) == k0;
        notes.push(format!("embedded algebra (x) Bunce-Deddens 2^inf, K-theory consistent: {consistent}"));
    }
    Ok(InvariantReport {
        k0,
        k0_order: Some("order unit [1] at the root; positive cone from the diagram".into()),
        k1,
        traces,
        sequences: Vec::new(),
        notes,
    })
}

fn single_identity_path(a: &DpsAssignment, depth: usize) -> bool {
    let d = a.diagram();
    (1..=depth).all(|n| d.vertex_count(n) == 1 && a.identity_edge(n).is_ok())
}

/// Levels examined when validating an assignment before reporting on it.
pub const VALIDATION_DEPTH: usize = 2;

/// The two short exact sequences of the extension. `k0_identity` is the
/// `K0` of the algebra built on the identity edges; when absent it is taken
/// to be `Z`, which requires the identity edges to form a single path.
pub fn dps_invariants(
    a: &DpsAssignment,
    shape: Option<AttractorShape>,
    k0_identity: Option<GroupExpr>,
) -> Result<InvariantReport> {
    let report = a.validate(VALIDATION_DEPTH);
    if let Some(bad) = report.checks.iter().find(|c| !c.passed) {
        return Err(Error::KTheory(format!(
            "assignment fails: {} ({})",
            bad.name,
            bad.witness.clone().unwrap_or_default()
        )));
    }
    let mut notes = Vec::new();
    let a0 = match k0_identity {
        Some(g) => g.normalize(),
        None if single_identity_path(a, VALIDATION_DEPTH + 1) => {
            notes.push("identity edges form a single path".into());
            GroupExpr::Z
        }
        None => return Err(Error::KTheory("identity edges branch; supply their K0".into())),
    };
    let (c0, c1, contractible) = match shape {
        Some(s) => {
            let k = attractor_catalog(s)?;
            (k.k0, k.k1, k.contractible)
        }
        None => (GroupExpr::Named("K^0(C)".into()), GroupExpr::Named("K^1(C)".into()), false),
    };
    let base = dimgroup::identify_group(a.diagram());
    let seq0 = ExactSequence::new(base.clone(), "K0", GroupExpr::tensor(a0.clone(), GroupExpr::quotient(c0, GroupExpr::Z)), contractible);
    let seq1 = ExactSequence::new(GroupExpr::Z, "K1", GroupExpr::tensor(a0, c1), contractible);
    if contractible {
        notes.push("contractible fibre: both left maps are isomorphisms".into());
    }
    let middle = |s: &ExactSequence| {
        s.middle_group().unwrap_or_else(|| GroupExpr::Named(format!("extension of {} by {}", s.right, s.left)))
    };
    let k0 = if contractible { base } else { middle(&seq0) };
    let k1 = if contractible { GroupExpr::Z } else { middle(&seq1) };
    Ok(InvariantReport { k0, k0_order: None, k1, traces: None, sequences: vec![seq0, seq1], notes })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureCheck {
    /// Measure of the paths through `prefix` staying in the first embedding
    /// up to level `m`.
    pub mu: BigRational,
    pub bound: BigRational,
    pub ok: bool,
}

/// Exact measure, under the unique invariant measure of the large diagram,
/// of the paths extending `prefix` whose edges at the remaining levels up
/// to `m` all lie in the first embedding; compared with `2^-m`.
pub fn measure_vanishing(pair: &EmbeddingPair, prefix: &[usize], m: usize) -> Result<MeasureCheck> {
    let d = pair.upper();
    check_finite_path(d, prefix)?;
    let n = prefix.len();
    if m <= n {
        return Err(Error::KTheory(format!("level {m} does not pass the prefix of length {n}")));
    }
    let trace = dimgroup::trace(d, TraceMode::Perron)?;
    let nu = trace.unique().ok_or_else(|| Error::KTheory("invariant measure is not unique".into()))?;
    if !nu.is_exact() {
        return Err(Error::KTheory("invariant measure is not rational".into()));
    }
    let mut counts = vec![BigRational::zero(); d.vertex_count(n)];
    counts[end_vertex(d, prefix)] = BigRational::one();
    for k in n + 1..=m {
        let mut next = vec![BigRational::zero(); d.vertex_count(k)];
        for e in 0..d.edge_count(k) {
            if matches!(pair.side_of(k, e), Some((0, _))) {
                let edge = d.edge(k, e);
                next[edge.target] = &next[edge.target] + &counts[edge.source];
            }
        }
        counts = next;
    }
    let weights = nu.at(m)?;
    let mu = counts.iter().zip(&weights).fold(BigRational::zero(), |acc, (c, w)| acc + c * w);
    let bound = BigRational::new(1.into(), num::BigInt::from(2).pow(m as u32));
    Ok(MeasureCheck { ok: mu <= bound, mu, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::dps::DpsAssignment;
    use crate::ifs;
    use crate::linalg::q_frac;
    use GroupExpr as G;

    #[test]
    fn factor_groups() {
        let r = factor_invariants(&catalog::binary_pair()).unwrap();
        assert_eq!((r.k0.clone(), r.k1.clone()), (G::ZInv(2), G::Z));
        assert!(r.notes.iter().any(|n| n.ends_with("consistent: true")), "{:?}", r.notes);
        let r = factor_invariants(&catalog::quaternary_pair()).unwrap();
        assert_eq!((r.k0, r.k1), (G::ZInv(2), G::ZInv(2)));
        let r = factor_invariants(&catalog::ternary_pair()).unwrap();
        assert_eq!((r.k0, r.k1), (G::ZInv(3), G::Z));
        assert!(!r.notes.iter().any(|n| n.contains("Bunce")));
    }

    #[test]
    fn shapes_parse() {
        assert_eq!("cube:3".parse::<AttractorShape>().unwrap(), AttractorShape::Cube(3));
        assert_eq!("cantor".parse::<AttractorShape>().unwrap(), AttractorShape::CantorShift(2));
        assert!("torus".parse::<AttractorShape>().is_err());
        for s in ["cube:2", "cantor:3", "sierpinski", "carpet-cube"] {
            assert_eq!(s.parse::<AttractorShape>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn extension_sequences() {
        let cube = dps_invariants(&catalog::cube_assignment(2), Some(AttractorShape::Cube(2)), None).unwrap();
        assert!(cube.sequences.iter().all(|s| s.left_iso && s.split == Split::Yes));
        assert_eq!(cube.k1, G::Z);

        let sier = DpsAssignment::full_words(catalog::sierpinski()).unwrap();
        let r = dps_invariants(&sier, Some(AttractorShape::Sierpinski), None).unwrap();
        assert!(r.sequences[0].left_iso);
        assert_eq!(r.k1, G::sum(vec![G::Z, G::ZInf]));
        assert_eq!(r.sequences[1].split, Split::Yes);

        let shift = DpsAssignment::full_words(ifs::code_space_system(2).unwrap()).unwrap();
        let r = dps_invariants(&shift, Some(AttractorShape::CantorShift(2)), None).unwrap();
        assert_eq!(r.sequences[0].right, G::quotient(G::ContFuncZ("{0,1}^N".into()), G::Z));
        assert_eq!(r.sequences[0].split, Split::Unknown);
        assert_eq!(r.k1, G::Z);

        let carpet = DpsAssignment::full_words(catalog::carpet_cube()).unwrap();
        let r = dps_invariants(&carpet, Some(AttractorShape::CarpetCube), None).unwrap();
        assert_eq!(r.sequences[0].right, G::ZInf);
        assert_eq!(r.k0, G::sum(vec![dimgroup::identify_group(carpet.diagram()), G::ZInf]));
        assert_eq!(r.k1, G::Z);

        let r = dps_invariants(&shift, None, None).unwrap();
        assert_eq!(r.sequences[1].split, Split::Unknown);
    }

    #[test]
    fn first_copy_measure() {
        let pair = catalog::quaternary_pair();
        let r = measure_vanishing(&pair, &[], 5).unwrap();
        assert_eq!(r.mu, q_frac(1, 32));
        assert!(r.ok);
        assert_eq!(measure_vanishing(&pair, &[], 1).unwrap().mu, q_frac(1, 2));
        let b = catalog::binary_pair();
        for m in 1..=8 {
            let r = measure_vanishing(&b, &[], m).unwrap();
            assert_eq!(r.mu, r.bound);
        }
        assert_eq!(measure_vanishing(&pair, &[3], 3).unwrap().mu, q_frac(1, 16));
        assert!(measure_vanishing(&pair, &[3], 1).is_err());
    }
}
