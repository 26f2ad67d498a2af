//! The Vershik (adic) map on properly ordered diagrams, its inverse, orbits
//! and the finite-level tower order.

use crate::diagram::{BratteliDiagram, Extremal, Growth, OrderCheck};
use crate::error::{Error, Result};
use crate::pathspace::{self, canonicalize, edge_at_canonical, LazyPath, PathContext, TailSpec};

/// Next edge into the same target, or `None` for a maximal edge.
pub fn successor(d: &BratteliDiagram, level: usize, e: usize) -> Option<usize> {
    let t = d.edge(level, e).target;
    d.in_edge_by_rank(level, t, d.position_in_order(level, e) + 1)
}

/// Previous edge into the same target, or `None` for a minimal edge.
pub fn predecessor(d: &BratteliDiagram, level: usize, e: usize) -> Option<usize> {
    let t = d.edge(level, e).target;
    let pos = d.position_in_order(level, e);
    if pos == 0 {
        None
    } else {
        d.in_edge_by_rank(level, t, pos - 1)
    }
}

/// The root path of minimal edges ending at vertex `v` of `V_level`.
pub fn min_path_to(d: &BratteliDiagram, level: usize, v: usize) -> Result<Vec<usize>> {
    d.extremal_path_to(Extremal::Min, level, v)
}

/// The root path of maximal edges ending at vertex `v` of `V_level`.
pub fn max_path_to(d: &BratteliDiagram, level: usize, v: usize) -> Result<Vec<usize>> {
    d.extremal_path_to(Extremal::Max, level, v)
}

/// A properly ordered path context with its extremal paths cached.
#[derive(Debug, Clone)]
pub struct OrderedSystem<'a, C: PathContext + ?Sized> {
    ctx: &'a C,
    xmax: LazyPath,
    xmin: LazyPath,
}

impl<'a, C: PathContext + ?Sized> OrderedSystem<'a, C> {
    pub fn new(ctx: &'a C) -> Result<Self> {
        let d = ctx.diagram();
        match d.growth() {
            Growth::Finite => {
                return Err(Error::NotProperlyOrdered("finite diagrams carry no Vershik map".into()))
            }
            Growth::Stationary { .. } => {
                if let OrderCheck::No { kind, .. } = d.is_properly_ordered(0) {
                    return Err(Error::NotProperlyOrdered(format!("{kind:?} path is not unique")));
                }
            }
            Growth::Odometer { .. } => {}
        }
        let xmax = canonicalize(ctx, &LazyPath::new(Vec::new(), TailSpec::AllMax))?;
        let xmin = canonicalize(ctx, &LazyPath::new(Vec::new(), TailSpec::AllMin))?;
        Ok(OrderedSystem { ctx, xmax, xmin })
    }

    pub fn context(&self) -> &'a C {
        self.ctx
    }

    pub fn diagram(&self) -> &'a BratteliDiagram {
        self.ctx.diagram()
    }

    pub fn xmax(&self) -> &LazyPath {
        &self.xmax
    }

    pub fn xmin(&self) -> &LazyPath {
        &self.xmin
    }

    fn step(&self, x: &LazyPath, forward: bool) -> Result<LazyPath> {
        let d = self.diagram();
        let x = canonicalize(self.ctx, x)?;
        let period = match &x.tail {
            TailSpec::Periodic(b) => b.len(),
            _ => 1,
        };
        // one periodic block past the prefix decides extremality; the extra
        // level covers odometer tails whose first edge happens to be extremal
        let horizon = x.prefix.len() + period + 1;
        let mut found = None;
        for n in 1..=horizon {
            let e = edge_at_canonical(self.ctx, &x, n)?;
            let next = if forward { successor(d, n, e) } else { predecessor(d, n, e) };
            if let Some(s) = next {
                found = Some((n, s));
                break;
            }
        }
        let Some((n, s)) = found else {
            return Ok(if forward { self.xmin.clone() } else { self.xmax.clone() });
        };
        let src = d.edge(n, s).source;
        let mut prefix = if forward {
            min_path_to(d, n - 1, src)?
        } else {
            max_path_to(d, n - 1, src)?
        };
        prefix.push(s);
        let tail = if n <= x.prefix.len() {
            prefix.extend_from_slice(&x.prefix[n..]);
            x.tail.clone()
        } else {
            match &x.tail {
                TailSpec::Periodic(b) => {
                    let mut b = b.clone();
                    let shift = (n - x.prefix.len()) % b.len();
                    b.rotate_left(shift);
                    TailSpec::Periodic(b)
                }
                t => t.clone(),
            }
        };
        canonicalize(self.ctx, &LazyPath::new(prefix, tail))
    }

    /// The Vershik map; sends the maximal path to the minimal one.
    pub fn vershik(&self, x: &LazyPath) -> Result<LazyPath> {
        self.step(x, true)
    }

    pub fn vershik_inverse(&self, x: &LazyPath) -> Result<LazyPath> {
        self.step(x, false)
    }

    /// `x` followed by `steps` iterates (inverse iterates when negative).
    /// Fails rather than truncating when `|steps|` exceeds `budget`.
    pub fn orbit(&self, x: &LazyPath, steps: i64, budget: usize) -> Result<Vec<LazyPath>> {
        let count = steps.unsigned_abs() as usize;
        if count > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        let mut out = vec![canonicalize(self.ctx, x)?];
        for _ in 0..count {
            let last = out.last().expect("nonempty");
            let next = if steps >= 0 { self.vershik(last)? } else { self.vershik_inverse(last)? };
            out.push(next);
        }
        Ok(out)
    }

    /// Number of forward steps from `x` to `target`, searching at most `budget` steps.
    pub fn return_time(&self, x: &LazyPath, target: &LazyPath, budget: usize) -> Result<usize> {
        let target = canonicalize(self.ctx, target)?;
        let mut cur = canonicalize(self.ctx, x)?;
        for k in 0..=budget {
            if cur == target {
                return Ok(k);
            }
            if k < budget {
                cur = self.vershik(&cur)?;
            }
        }
        Err(Error::BudgetExceeded { budget })
    }
}

/// The finite successor on length-`n` paths: the least non-maximal edge
/// advances and earlier edges reset to minimal. `None` on the maximal path.
pub fn finite_successor(d: &BratteliDiagram, p: &[usize]) -> Result<Option<Vec<usize>>> {
    for (i, &e) in p.iter().enumerate() {
        let level = i + 1;
        if let Some(s) = successor(d, level, e) {
            let mut out = min_path_to(d, i, d.edge(level, s).source)?;
            out.push(s);
            out.extend_from_slice(&p[level..]);
            return Ok(Some(out));
        }
    }
    Ok(None)
}

/// All length-`n` root paths in tower order: for each vertex of `V_n` in
/// index order, from its minimal path to its maximal path.
pub fn tower_enumeration(d: &BratteliDiagram, n: usize) -> Result<Vec<Vec<usize>>> {
    if n > 0 {
        d.check_level(n)?;
    }
    let mut out = Vec::new();
    for v in 0..d.vertex_count(n) {
        let mut cur = Some(min_path_to(d, n, v)?);
        while let Some(p) = cur {
            cur = finite_successor(d, &p)?;
            out.push(p);
        }
    }
    Ok(out)
}

/// Whether `x` lies in the forward or backward orbit of an extremal path,
/// where the orbit leaves its tail-equivalence class.
pub fn touches_extremal_class<C: PathContext + ?Sized>(sys: &OrderedSystem<'_, C>, x: &LazyPath) -> Result<bool> {
    let ctx = sys.context();
    Ok(pathspace::tail_equivalent(ctx, x, sys.xmax())?.is_some()
        || pathspace::tail_equivalent(ctx, x, sys.xmin())?.is_some())
}
