//! Finite models of the groupoid algebras: functions on a full equivalence
//! relation over finitely many cylinders, convolved as matrices. Entries are
//! Gaussian integers times a common power of `1/sqrt(2)`, so the partial
//! isometry and Hadamard identities below hold exactly.

use num::complex::Complex;
use num::Zero;

use crate::embedding::EmbeddingPair;
use crate::error::{Error, Result};

type Entry = Complex<i128>;

// largest supported Hadamard order; 2^12 rows
const MAX_ORDER: usize = 12;

/// Square matrix whose value is `entries * 2^(-scale/2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicMatrix {
    scale: u32,
    entries: Vec<Vec<Entry>>,
}

fn overflow() -> Error {
    Error::FiniteModel("entry overflow".into())
}

fn checked_mul(a: Entry, b: Entry) -> Result<Entry> {
    let re = a.re.checked_mul(b.re).and_then(|x| x.checked_sub(a.im.checked_mul(b.im)?)).ok_or_else(overflow)?;
    let im = a.re.checked_mul(b.im).and_then(|x| x.checked_add(a.im.checked_mul(b.re)?)).ok_or_else(overflow)?;
    Ok(Complex::new(re, im))
}

fn checked_add(a: Entry, b: Entry) -> Result<Entry> {
    Ok(Complex::new(a.re.checked_add(b.re).ok_or_else(overflow)?, a.im.checked_add(b.im).ok_or_else(overflow)?))
}

impl DyadicMatrix {
    pub fn new(entries: Vec<Vec<Entry>>, scale: u32) -> Result<Self> {
        let n = entries.len();
        if entries.iter().any(|r| r.len() != n) {
            return Err(Error::FiniteModel("matrix is not square".into()));
        }
        Ok(DyadicMatrix { scale, entries }.reduced())
    }

    pub fn from_integers(rows: &[Vec<i64>], scale: u32) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| Complex::new(x as i128, 0)).collect()).collect(), scale)
    }

    pub fn zeros(n: usize) -> Self {
        DyadicMatrix { scale: 0, entries: vec![vec![Entry::zero(); n]; n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i][i] = Complex::new(1, 0);
        }
        m
    }

    /// The matrix unit with a one at `(i, j)`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.entries[i][j] = Complex::new(1, 0);
        m
    }

    pub fn all_ones(n: usize, scale: u32) -> Self {
        DyadicMatrix { scale, entries: vec![vec![Complex::new(1, 0); n]; n] }.reduced()
    }

    fn map_entries(&self, f: impl Fn(usize, usize) -> Entry) -> Self {
        let n = self.dim();
        DyadicMatrix { scale: self.scale, entries: (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect() }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn raw(&self, i: usize, j: usize) -> Entry {
        self.entries[i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.is_zero())
    }

    /// Entry `(i, j)` in floating point.
    pub fn value(&self, i: usize, j: usize) -> (f64, f64) {
        let f = 2f64.powf(-(self.scale as f64) / 2.0);
        let e = self.entries[i][j];
        (e.re as f64 * f, e.im as f64 * f)
    }

    // pull factors of 2 out of the entries while they divide evenly
    fn reduced(mut self) -> Self {
        if self.is_zero() {
            self.scale = 0;
            return self;
        }
        while self.scale >= 2 && self.entries.iter().flatten().all(|e| e.re % 2 == 0 && e.im % 2 == 0) {
            for e in self.entries.iter_mut().flatten() {
                *e = Complex::new(e.re / 2, e.im / 2);
            }
            self.scale -= 2;
        }
        self
    }

    fn rescaled(&self, scale: u32) -> Result<Vec<Vec<Entry>>> {
        debug_assert!(scale >= self.scale && (scale - self.scale) % 2 == 0);
        let f = 1i128.checked_shl((scale - self.scale) / 2).ok_or_else(overflow)?;
        self.entries
            .iter()
            .map(|r| r.iter().map(|&e| checked_mul(e, Complex::new(f, 0))).collect())
            .collect()
    }

    pub fn mul(&self, other: &DyadicMatrix) -> Result<DyadicMatrix> {
        let n = self.dim();
        if other.dim() != n {
            return Err(Error::FiniteModel(format!("cannot multiply {n}x{n} by {0}x{0}", other.dim())));
        }
        let busy: Vec<bool> = other.entries.iter().map(|r| r.iter().any(|e| !e.is_zero())).collect();
        let mut out = vec![vec![Entry::zero(); n]; n];
        for (i, row) in self.entries.iter().enumerate() {
            for (k, &a) in row.iter().enumerate() {
                if a.is_zero() || !busy[k] {
                    continue;
                }
                for (j, &b) in other.entries[k].iter().enumerate() {
                    if !b.is_zero() {
                        out[i][j] = checked_add(out[i][j], checked_mul(a, b)?)?;
                    }
                }
            }
        }
        Ok(DyadicMatrix { scale: self.scale + other.scale, entries: out }.reduced())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> DyadicMatrix {
        self.map_entries(|i, j| self.entries[j][i].conj())
    }

    /// Kronecker product.
    pub fn kron(&self, other: &DyadicMatrix) -> Result<DyadicMatrix> {
        let (a, b) = (self.dim(), other.dim());
        let mut out = vec![vec![Entry::zero(); a * b]; a * b];
        for i in 0..a * b {
            for j in 0..a * b {
                out[i][j] = checked_mul(self.entries[i / b][j / b], other.entries[i % b][j % b])?;
            }
        }
        Ok(DyadicMatrix { scale: self.scale + other.scale, entries: out }.reduced())
    }

    /// Exact equality of the represented matrices.
    pub fn same_as(&self, other: &DyadicMatrix) -> Result<bool> {
        if self.dim() != other.dim() {
            return Ok(false);
        }
        if (self.scale + other.scale) % 2 == 1 {
            // an odd power of sqrt(2) never equals a Gaussian rational unless both vanish
            return Ok(self.is_zero() && other.is_zero());
        }
        let s = self.scale.max(other.scale);
        Ok(self.rescaled(s)? == other.rescaled(s)?)
    }

    /// Largest entry modulus of `self - other`.
    pub fn residual(&self, other: &DyadicMatrix) -> f64 {
        let n = self.dim().min(other.dim());
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (self.value(i, j), other.value(i, j));
                worst = worst.max((a.0 - b.0).hypot(a.1 - b.1));
            }
        }
        worst
    }
}

/// A function on the full equivalence relation generated by `classes`
/// (point `i` is related to `j` when `classes[i] == classes[j]`), stored as
/// the matrix of its values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupoidFn {
    classes: Vec<usize>,
    values: DyadicMatrix,
}

impl FiniteGroupoidFn {
    pub fn new(classes: Vec<usize>, values: DyadicMatrix) -> Result<Self> {
        let n = classes.len();
        if values.dim() != n {
            return Err(Error::FiniteModel(format!("{n} points but a {0}x{0} matrix", values.dim())));
        }
        for i in 0..n {
            for j in 0..n {
                if classes[i] != classes[j] && !values.raw(i, j).is_zero() {
                    return Err(Error::FiniteModel(format!("({i}, {j}) is not an arrow of the relation")));
                }
            }
        }
        Ok(FiniteGroupoidFn { classes, values })
    }

    /// Indicator of the single arrow `(i, j)`.
    pub fn indicator(classes: Vec<usize>, i: usize, j: usize) -> Result<Self> {
        let n = classes.len();
        Self::new(classes, DyadicMatrix::unit(n, i, j))
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn values(&self) -> &DyadicMatrix {
        &self.values
    }

    fn check_same(&self, other: &FiniteGroupoidFn) -> Result<()> {
        if self.classes != other.classes {
            return Err(Error::FiniteModel("functions live on different relations".into()));
        }
        Ok(())
    }

    /// `(f * g)(x, z) = sum over y related to x of f(x, y) g(y, z)`.
    pub fn convolve(&self, other: &FiniteGroupoidFn) -> Result<FiniteGroupoidFn> {
        self.check_same(other)?;
        let n = self.classes.len();
        let mut out = vec![vec![Entry::zero(); n]; n];
        let (s, t) = (self.values.scale, other.values.scale);
        for x in 0..n {
            for z in (0..n).filter(|&z| self.classes[z] == self.classes[x]) {
                let mut acc = Entry::zero();
                for y in (0..n).filter(|&y| self.classes[y] == self.classes[x]) {
                    acc = checked_add(acc, checked_mul(self.values.raw(x, y), other.values.raw(y, z))?)?;
                }
                out[x][z] = acc;
            }
        }
        Ok(FiniteGroupoidFn { classes: self.classes.clone(), values: DyadicMatrix { scale: s + t, entries: out }.reduced() })
    }

    /// `f*(x, y) = conj f(y, x)`.
    pub fn adjoint(&self) -> FiniteGroupoidFn {
        FiniteGroupoidFn { classes: self.classes.clone(), values: self.values.adjoint() }
    }
}

/// Whether `f` takes one value on each class of `labels`, where
/// `labels[i][j]` names the class of the arrow `(i, j)`; arrows outside the
/// relation are ignored.
pub fn alpha_constancy(f: &FiniteGroupoidFn, labels: &[Vec<usize>]) -> Result<bool> {
    let n = f.classes.len();
    if labels.len() != n || labels.iter().any(|r| r.len() != n) {
        return Err(Error::FiniteModel("partition does not match the relation".into()));
    }
    let mut seen: std::collections::HashMap<usize, Entry> = std::collections::HashMap::new();
    for i in 0..n {
        for j in (0..n).filter(|&j| f.classes[i] == f.classes[j]) {
            let v = f.values.raw(i, j);
            if *seen.entry(labels[i][j]).or_insert(v) != v {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `n`-fold tensor power of the Hadamard matrix.
pub fn hadamard(n: usize) -> Result<DyadicMatrix> {
    let h = DyadicMatrix::from_integers(&[vec![1, 1], vec![1, -1]], 1)?;
    let mut out = DyadicMatrix::identity(1);
    for _ in 0..n {
        out = out.kron(&h)?;
    }
    Ok(out)
}

/// `2^(-n/2)` times the sum of the matrix units `e(0, w)` over all `2^n`
/// basis indices `w`.
pub fn partial_isometry(n: usize) -> DyadicMatrix {
    let size = 1usize << n;
    let mut m = DyadicMatrix::zeros(size);
    m.entries[0] = vec![Complex::new(1, 0); size];
    m.scale = n as u32;
    m.reduced()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HadamardReport {
    pub n: usize,
    pub vvstar_ok: bool,
    pub vstarv_ok: bool,
    pub conjugation_ok: bool,
    /// Max-entry residuals of the three identities, in the order above.
    pub residuals: [f64; 3],
}

impl HadamardReport {
    pub fn all_ok(&self) -> bool {
        self.vvstar_ok && self.vstarv_ok && self.conjugation_ok
    }
}

/// Checks `v v* = e(0,0)`, `v* v = 2^-n J` and `H e(0,0) H = v* v` exactly.
pub fn hadamard_verify(n: usize) -> Result<HadamardReport> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::FiniteModel(format!("order must lie in 1..={MAX_ORDER}")));
    }
    let size = 1usize << n;
    let v = partial_isometry(n);
    let vs = v.adjoint();
    let e00 = DyadicMatrix::unit(size, 0, 0);
    let flat = DyadicMatrix::all_ones(size, 2 * n as u32);
    let vv = v.mul(&vs)?;
    let svv = vs.mul(&v)?;
    let h = hadamard(n)?;
    // H is self-adjoint
    let conj = h.mul(&e00)?.mul(&h)?;
    Ok(HadamardReport {
        n,
        vvstar_ok: vv.same_as(&e00)?,
        vstarv_ok: svv.same_as(&flat)?,
        conjugation_ok: conj.same_as(&svv)?,
        residuals: [vv.residual(&e00), svv.residual(&flat), conj.residual(&svv)],
    })
}

/// The bisections used to move the cylinder of `p` into the saturated part:
/// `p` keeps its edges below the first level `k` of its final embedded run,
/// and each later edge is replaced by its image under either embedding.
/// Returns `k` and the `2^(n-k+1)` resulting paths, side choices read as
/// binary digits with the earliest level most significant. `k` is `None`
/// when the last edge is not embedded, in which case the list is just `p`.
pub fn isometry_paths(pair: &EmbeddingPair, p: &[usize]) -> Result<(Option<usize>, Vec<Vec<usize>>)> {
    let n = p.len();
    let side = |k: usize| pair.side_of(k, p[k - 1]);
    if n == 0 || side(n).is_none() {
        return Ok((None, vec![p.to_vec()]));
    }
    let k = (1..=n).rev().take_while(|&j| side(j).is_some()).last().expect("nonempty run");
    let run = n - k + 1;
    if run >= usize::BITS as usize {
        return Err(Error::FiniteModel("embedded run too long".into()));
    }
    let lower: Vec<usize> = (k..=n).map(|j| side(j).expect("embedded").1).collect();
    let paths = (0..1usize << run)
        .map(|w| {
            let mut q = p[..k - 1].to_vec();
            for (i, &f) in lower.iter().enumerate() {
                let s = (w >> (run - 1 - i)) & 1;
                q.push(pair.edge_image(s, k + i, f));
            }
            q
        })
        .collect();
    Ok((Some(k), paths))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn m(rows: &[Vec<i64>]) -> DyadicMatrix {
        DyadicMatrix::from_integers(rows, 0).unwrap()
    }

    #[test]
    fn matrix_units_multiply() {
        let classes = vec![0; 3];
        let a = FiniteGroupoidFn::indicator(classes.clone(), 0, 1).unwrap();
        let b = FiniteGroupoidFn::indicator(classes.clone(), 1, 2).unwrap();
        assert_eq!(a.convolve(&b).unwrap(), FiniteGroupoidFn::indicator(classes.clone(), 0, 2).unwrap());
        assert_eq!(a.convolve(&a.adjoint()).unwrap(), FiniteGroupoidFn::indicator(classes, 0, 0).unwrap());
    }

    #[test]
    fn convolution_is_matrix_product() {
        let classes = vec![0, 1, 0, 2, 3, 1, 2, 3];
        let vals = |seed: i64| {
            DyadicMatrix::from_integers(
                &(0..8)
                    .map(|i| (0..8).map(|j| if classes[i] == classes[j] { (i as i64 * 3 + j as i64 * seed) % 7 - 3 } else { 0 }).collect())
                    .collect::<Vec<_>>(),
                1,
            )
            .unwrap()
        };
        let f = FiniteGroupoidFn::new(classes.clone(), vals(5)).unwrap();
        let g = FiniteGroupoidFn::new(classes.clone(), vals(2)).unwrap();
        let prod = f.values().mul(g.values()).unwrap();
        assert!(f.convolve(&g).unwrap().values().same_as(&prod).unwrap());
        assert!(FiniteGroupoidFn::new(classes, m(&vec![vec![1; 8]; 8])).is_err());
    }

    #[test]
    fn scale_bookkeeping() {
        let a = DyadicMatrix::from_integers(&[vec![2, 0], vec![0, 2]], 2).unwrap();
        assert!(a.same_as(&DyadicMatrix::identity(2)).unwrap());
        let r = DyadicMatrix::from_integers(&[vec![1, 0], vec![0, 1]], 1).unwrap();
        assert!(!r.same_as(&DyadicMatrix::identity(2)).unwrap());
        assert!(r.mul(&r).unwrap().same_as(&DyadicMatrix::from_integers(&[vec![1, 0], vec![0, 1]], 2).unwrap()).unwrap());
    }

    #[test]
    fn hadamard_identities() {
        let r = hadamard_verify(1).unwrap();
        assert!(r.all_ok());
        assert_eq!(r.residuals, [0.0; 3]);
        let svv = partial_isometry(1).adjoint().mul(&partial_isometry(1)).unwrap();
        assert_eq!(svv.value(0, 1), (0.5, 0.0));
        for n in 1..=4 {
            let h = hadamard(n).unwrap();
            assert!(h.mul(&h.adjoint()).unwrap().same_as(&DyadicMatrix::identity(1 << n)).unwrap());
        }
        assert!(hadamard_verify(0).is_err());
    }

    #[test]
    fn alpha_image_membership() {
        let pair = catalog::binary_pair();
        let (paths, labels) = pair.fibre_classes(2, 0).unwrap();
        let classes = vec![0; paths.len()];
        let p = &paths[0];
        let (k, qs) = isometry_paths(&pair, p).unwrap();
        assert_eq!(k, Some(1));
        assert_eq!(qs.len(), 4);
        let idx: Vec<usize> = qs.iter().map(|q| paths.iter().position(|x| x == q).unwrap()).collect();
        let mut vals = DyadicMatrix::zeros(paths.len());
        for &a in &idx {
            for &b in &idx {
                vals.entries[a][b] = Complex::new(1, 0);
            }
        }
        vals.scale = 4;
        let proj = FiniteGroupoidFn::new(classes.clone(), vals).unwrap();
        assert!(alpha_constancy(&proj, &labels).unwrap());
        let corner = FiniteGroupoidFn::indicator(classes.clone(), 0, 0).unwrap();
        assert!(!alpha_constancy(&corner, &labels).unwrap());
        let flat = FiniteGroupoidFn::new(classes, DyadicMatrix::all_ones(paths.len(), 0)).unwrap();
        assert!(alpha_constancy(&flat, &labels).unwrap());
    }

    #[test]
    fn isometry_paths_keep_the_free_prefix() {
        let pair = catalog::ternary_pair();
        let (k, qs) = isometry_paths(&pair, &[2, 0]).unwrap();
        assert_eq!(k, Some(2));
        assert_eq!(qs, vec![vec![2, 0], vec![2, 1]]);
        assert_eq!(isometry_paths(&pair, &[0, 2]).unwrap().0, None);
    }
}
