//! Iterated function systems with exact rational affine maps, plus the
//! symbolic prepend system on sequences. Cells of the attractor are images
//! of an invariant box under words of maps.

use std::collections::HashMap;

use num::{BigRational, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, q};

pub type Point = Vec<BigRational>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineMap {
    pub matrix: Vec<Vec<BigRational>>,
    pub offset: Point,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<BigRational>>, offset: Point) -> Result<Self> {
        let d = offset.len();
        if d == 0 || matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
            return Err(Error::Ifs(format!("matrix does not match offset dimension {d}")));
        }
        Ok(AffineMap { matrix, offset })
    }

    /// `x -> c x + b`.
    pub fn scalar(c: BigRational, offset: Point) -> Self {
        let d = offset.len();
        let matrix = (0..d)
            .map(|i| (0..d).map(|j| if i == j { c.clone() } else { BigRational::zero() }).collect())
            .collect();
        AffineMap { matrix, offset }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, x: &[BigRational]) -> Point {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(x).fold(b.clone(), |acc, (a, xi)| acc + a * xi))
            .collect()
    }

    /// `self o other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let d = self.dim();
        let matrix = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).fold(BigRational::zero(), |acc, k| acc + &self.matrix[i][k] * &other.matrix[k][j]))
                    .collect()
            })
            .collect();
        AffineMap { matrix, offset: self.apply(&other.offset) }
    }

    pub fn is_invertible(&self) -> bool {
        !linalg::determinant(&self.matrix).is_zero()
    }

    /// The unique fixed point when `I - A` is invertible.
    pub fn fixed_point(&self) -> Option<Point> {
        let d = self.dim();
        let m: Vec<Vec<BigRational>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { q(1) } else { q(0) } - &self.matrix[i][j]).collect())
            .collect();
        linalg::solve(&m, &self.offset)
    }

    fn scalar_factor(&self) -> Option<BigRational> {
        let c = self.matrix[0][0].clone();
        let d = self.dim();
        let ok = (0..d).all(|i| (0..d).all(|j| self.matrix[i][j] == if i == j { c.clone() } else { BigRational::zero() }));
        ok.then_some(c)
    }
}

/// Certified upper bound on the Euclidean operator norm: exact for scalar
/// matrices, the spectral norm rounded up in the plane, else the smaller of
/// `sqrt(|A|_1 |A|_inf)` and the Frobenius norm.
pub fn lipschitz(m: &AffineMap) -> BigRational {
    if let Some(c) = m.scalar_factor() {
        return c.abs();
    }
    let d = m.dim();
    if d == 2 {
        let a = &m.matrix;
        // largest eigenvalue of A^T A from its trace and determinant
        let tr = a.iter().flatten().fold(BigRational::zero(), |s, x| s + x * x);
        let det = &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0];
        let disc = &tr * &tr - q(4) * &det * &det;
        let top = (tr + linalg::sqrt_upper(&disc)) / q(2);
        return linalg::sqrt_upper(&top);
    }
    let row = (0..d)
        .map(|i| m.matrix[i].iter().fold(BigRational::zero(), |a, x| a + x.abs()))
        .max()
        .unwrap_or_default();
    let col = (0..d)
        .map(|j| (0..d).fold(BigRational::zero(), |a, i| a + m.matrix[i][j].abs()))
        .max()
        .unwrap_or_default();
    let frob = m.matrix.iter().flatten().fold(BigRational::zero(), |a, x| a + x * x);
    linalg::sqrt_upper(&(&row * &col)).min(linalg::sqrt_upper(&frob))
}

/// Closed axis-parallel box.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoxRegion {
    pub lo: Point,
    pub hi: Point,
}

impl BoxRegion {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Ifs("box corners out of order".into()));
        }
        Ok(BoxRegion { lo, hi })
    }

    pub fn unit(d: usize) -> Self {
        BoxRegion { lo: vec![q(0); d], hi: vec![q(1); d] }
    }

    pub fn corners(&self) -> Vec<Point> {
        let d = self.lo.len();
        (0..1usize << d)
            .map(|mask| (0..d).map(|i| if mask >> i & 1 == 1 { self.hi[i].clone() } else { self.lo[i].clone() }).collect())
            .collect()
    }

    pub fn bounding(points: &[Point]) -> Self {
        let d = points[0].len();
        let lo = (0..d).map(|i| points.iter().map(|p| p[i].clone()).min().expect("nonempty")).collect();
        let hi = (0..d).map(|i| points.iter().map(|p| p[i].clone()).max().expect("nonempty")).collect();
        BoxRegion { lo, hi }
    }

    pub fn contains_point(&self, p: &[BigRational]) -> bool {
        p.iter().zip(&self.lo).zip(&self.hi).all(|((x, a), b)| a <= x && x <= b)
    }

    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        self.contains_point(&other.lo) && self.contains_point(&other.hi)
    }

    /// Largest coordinate gap between the boxes; zero when they meet.
    pub fn gap(&self, other: &BoxRegion) -> BigRational {
        let mut g = BigRational::zero();
        for i in 0..self.lo.len() {
            let a = &other.lo[i] - &self.hi[i];
            let b = &self.lo[i] - &other.hi[i];
            g = g.max(a).max(b);
        }
        g
    }

    pub fn diameter_sq(&self) -> BigRational {
        self.lo.iter().zip(&self.hi).fold(BigRational::zero(), |a, (l, h)| a + (h - l) * (h - l))
    }
}

fn dist_sq(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + (x - y) * (x - y))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSystem {
    pub maps: Vec<AffineMap>,
    pub hull: BoxRegion,
    pub lambda: BigRational,
}

impl AffineSystem {
    /// Checks contraction and that `hull` contains its images; without a
    /// hull, a centered cube invariant under the sup-norm contraction is used.
    pub fn new(maps: Vec<AffineMap>, hull: Option<BoxRegion>) -> Result<Self> {
        let d = maps.first().ok_or_else(|| Error::Ifs("system has no maps".into()))?.dim();
        if maps.iter().any(|m| m.dim() != d) {
            return Err(Error::Ifs("maps have different dimensions".into()));
        }
        let mut lambda = BigRational::zero();
        for (i, m) in maps.iter().enumerate() {
            let l = lipschitz(m);
            if l >= q(1) {
                return Err(Error::Ifs(format!("map {i} is not a contraction (bound {l})")));
            }
            lambda = lambda.max(l);
        }
        let hull = match hull {
            Some(h) => h,
            None => default_hull(&maps)?,
        };
        if hull.lo.len() != d {
            return Err(Error::Ifs("hull dimension differs from the maps".into()));
        }
        for (i, m) in maps.iter().enumerate() {
            if !hull.corners().iter().all(|c| hull.contains_point(&m.apply(c))) {
                return Err(Error::Ifs(format!("hull is not invariant under map {i}")));
            }
        }
        Ok(AffineSystem { maps, hull, lambda })
    }

    pub fn dim(&self) -> usize {
        self.hull.lo.len()
    }
}

fn default_hull(maps: &[AffineMap]) -> Result<BoxRegion> {
    let sup = |m: &AffineMap| {
        m.matrix.iter().map(|r| r.iter().fold(BigRational::zero(), |a, x| a + x.abs())).max().unwrap_or_default()
    };
    let c = maps.iter().map(sup).max().unwrap_or_default();
    if c >= q(1) {
        return Err(Error::Ifs("no hull given and the maps do not contract the sup norm".into()));
    }
    let b = maps.iter().flat_map(|m| m.offset.iter().map(|x| x.abs())).max().unwrap_or_default();
    let r = b / (q(1) - c);
    let d = maps[0].dim();
    Ok(BoxRegion { lo: vec![-r.clone(); d], hi: vec![r; d] })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IfsSystem {
    Affine(AffineSystem),
    /// Prepending one of `symbols` letters to a sequence; distance
    /// `2^-k` for sequences first differing at index `k`.
    CodeSpace { symbols: usize },
}

impl IfsSystem {
    pub fn map_count(&self) -> usize {
        match self {
            IfsSystem::Affine(s) => s.maps.len(),
            IfsSystem::CodeSpace { symbols } => *symbols,
        }
    }

    pub fn lambda(&self) -> BigRational {
        match self {
            IfsSystem::Affine(s) => s.lambda.clone(),
            IfsSystem::CodeSpace { .. } => linalg::q_frac(1, 2),
        }
    }

    /// Squared diameter of the starting region.
    pub fn hull_diameter_sq(&self) -> BigRational {
        match self {
            IfsSystem::Affine(s) => s.hull.diameter_sq(),
            IfsSystem::CodeSpace { .. } => q(1),
        }
    }
}

/// The prepend system on `k` symbols.
pub fn code_space_system(k: usize) -> Result<IfsSystem> {
    if k < 2 {
        return Err(Error::Ifs("code space needs at least two symbols".into()));
    }
    Ok(IfsSystem::CodeSpace { symbols: k })
}

/// `f_{w_1} o .. o f_{w_n}` on a symbolic sequence: prepends the word.
pub fn prepend(word: &[usize], x: &[usize]) -> Vec<usize> {
    word.iter().chain(x).copied().collect()
}

/// Distance on symbolic sequences.
pub fn code_distance(x: &[usize], y: &[usize]) -> BigRational {
    match x.iter().zip(y).position(|(a, b)| a != b) {
        Some(k) => linalg::q_frac(1, 1 << k.min(62)),
        None => BigRational::zero(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub word: Vec<usize>,
    /// Bounding box of the image of the hull (affine systems).
    pub bbox: Option<BoxRegion>,
    /// Exact squared diameter of the image of the hull.
    pub diameter_sq: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellApprox {
    pub depth: usize,
    pub cells: Vec<Cell>,
}

impl CellApprox {
    pub fn max_diameter_sq(&self) -> BigRational {
        self.cells.iter().map(|c| c.diameter_sq.clone()).max().unwrap_or_default()
    }
}

fn words(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..k).map(move |i| {
                    let mut v = w.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}

/// Images of the hull under all words of length `n`, in lexicographic order.
pub fn attractor_cells(s: &IfsSystem, n: usize) -> CellApprox {
    match s {
        IfsSystem::CodeSpace { symbols } => CellApprox {
            depth: n,
            cells: words(*symbols, n)
                .into_iter()
                .map(|word| Cell { word, bbox: None, diameter_sq: linalg::q_frac(1, 1 << (2 * n).min(62)) })
                .collect(),
        },
        IfsSystem::Affine(sys) => {
            let d = sys.dim();
            let mut layer: Vec<(Vec<usize>, AffineMap)> = vec![(Vec::new(), AffineMap::scalar(q(1), vec![q(0); d]))];
            for _ in 0..n {
                layer = layer
                    .into_iter()
                    .flat_map(|(w, f)| {
                        sys.maps
                            .iter()
                            .enumerate()
                            .map(|(i, g)| {
                                let mut word = w.clone();
                                word.push(i);
                                (word, f.compose(g))
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect();
            }
            let corners = sys.hull.corners();
            let layer = layer.into_iter().map(|(w, f)| (w, corners.iter().map(|c| f.apply(c)).collect::<Vec<Point>>()));
            let cells = layer
                .into_iter()
                .map(|(word, pts)| {
                    let mut d = BigRational::zero();
                    for a in &pts {
                        for b in &pts {
                            d = d.max(dist_sq(a, b));
                        }
                    }
                    Cell { word, bbox: Some(BoxRegion::bounding(&pts)), diameter_sq: d }
                })
                .collect();
            CellApprox { depth: n, cells }
        }
    }
}

/// `f_{w_1} o .. o f_{w_n}`.
pub fn word_map(sys: &AffineSystem, word: &[usize]) -> AffineMap {
    let d = sys.dim();
    let id = AffineMap::scalar(q(1), vec![q(0); d]);
    word.iter().fold(id, |acc, &i| acc.compose(&sys.maps[i]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Separation {
    /// Cells with different first letters are at least `gap` apart at `depth`.
    Separated { gap: BigRational, depth: usize },
    /// `point` lies in the images of the attractor under maps `first` and `second`.
    Overlapping { point: Point, first: usize, second: usize },
    Unknown,
}

/// Decides whether the first-level pieces of the attractor are pairwise
/// disjoint, with an exact certificate either way when one is found.
pub fn strong_separation(s: &IfsSystem, depth: usize) -> Separation {
    let sys = match s {
        IfsSystem::CodeSpace { .. } => return Separation::Separated { gap: q(1), depth: 1 },
        IfsSystem::Affine(sys) => sys,
    };
    if sys.maps.len() < 2 {
        return Separation::Separated { gap: q(1), depth: 0 };
    }
    for n in 1..=depth.max(1) {
        let cells = attractor_cells(s, n).cells;
        let mut gap: Option<BigRational> = None;
        for a in &cells {
            for b in &cells {
                if a.word[0] < b.word[0] {
                    let g = a.bbox.as_ref().expect("affine").gap(b.bbox.as_ref().expect("affine"));
                    gap = Some(gap.map_or(g.clone(), |x| x.min(g)));
                }
            }
        }
        if let Some(g) = gap {
            if g.is_positive() {
                return Separation::Separated { gap: g, depth: n };
            }
        }
    }
    // attractor points f_u(fix f_w) for short words, grouped by first letter
    let mut seen: HashMap<Point, usize> = HashMap::new();
    let short: Vec<Vec<usize>> = (1..=2).flat_map(|l| words(sys.maps.len(), l)).collect();
    let fixed: Vec<Point> = short.iter().filter_map(|w| word_map(sys, w).fixed_point()).collect();
    for u in &short {
        let f = word_map(sys, u);
        for p in &fixed {
            let y = f.apply(p);
            match seen.get(&y) {
                Some(&i) if i != u[0] => {
                    return Separation::Overlapping { point: y, first: i.min(u[0]), second: i.max(u[0]) }
                }
                Some(_) => {}
                None => {
                    seen.insert(y, u[0]);
                }
            }
        }
    }
    Separation::Unknown
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::linalg::q_frac;

    #[test]
    fn lipschitz_bounds() {
        let half = AffineMap::scalar(q_frac(1, 2), vec![q(0)]);
        assert_eq!(lipschitz(&half), q_frac(1, 2));
        let id = AffineMap::scalar(q(1), vec![q(0), q(0)]);
        assert_eq!(lipschitz(&id), q(1));
        assert!(AffineSystem::new(vec![id], None).is_err());
        let shear = AffineMap::new(vec![vec![q_frac(1, 2), q_frac(1, 4)], vec![q(0), q_frac(1, 2)]], vec![q(0), q(0)]).unwrap();
        let l = lipschitz(&shear);
        // true norm is about 0.640
        assert!(l >= q_frac(640, 1000) && l < q_frac(641, 1000), "{l}");
    }

    #[test]
    fn cells() {
        let cantor = catalog::middle_thirds();
        let c = attractor_cells(&cantor, 2);
        assert_eq!(c.cells.len(), 4);
        assert!(c.cells.iter().all(|x| x.diameter_sq == q_frac(1, 81)));
        assert_eq!(attractor_cells(&catalog::sierpinski(), 1).cells.len(), 3);
        let zero = attractor_cells(&cantor, 0);
        assert_eq!(zero.cells[0].bbox, Some(BoxRegion::unit(1)));
    }

    #[test]
    fn separation_verdicts() {
        assert_eq!(
            strong_separation(&catalog::middle_thirds(), 3),
            Separation::Separated { gap: q_frac(1, 3), depth: 1 }
        );
        match strong_separation(&catalog::halves(), 3) {
            Separation::Overlapping { point, .. } => assert_eq!(point, vec![q_frac(1, 2)]),
            other => panic!("{other:?}"),
        }
        match strong_separation(&catalog::sierpinski(), 3) {
            Separation::Overlapping { point, first, second } => {
                assert_eq!((first, second), (0, 1));
                assert_eq!(point, vec![q_frac(1, 2), q(0)]);
            }
            other => panic!("{other:?}"),
        }
        let code = code_space_system(2).unwrap();
        assert_eq!(strong_separation(&code, 1), Separation::Separated { gap: q(1), depth: 1 });
    }

    #[test]
    fn code_space() {
        assert_eq!(prepend(&[0, 1], &[0, 0]), vec![0, 1, 0, 0]);
        assert_eq!(code_distance(&[0, 1], &[1, 1]), q(1));
        assert_eq!(code_distance(&[0, 1, 0], &[0, 1, 1]), q_frac(1, 4));
        let c = attractor_cells(&code_space_system(3).unwrap(), 2);
        assert_eq!(c.cells.len(), 9);
        assert_eq!(c.max_diameter_sq(), q_frac(1, 16));
        assert!(code_space_system(1).is_err());
    }

    #[test]
    fn hull_must_be_invariant() {
        let m = AffineMap::scalar(q_frac(1, 2), vec![q(2)]);
        assert!(AffineSystem::new(vec![m.clone()], Some(BoxRegion::unit(1))).is_err());
        let s = AffineSystem::new(vec![m], None).unwrap();
        assert!(s.hull.contains_point(&[q(4)]));
    }
}
