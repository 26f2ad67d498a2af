//! Small exact linear algebra over the rationals.

use num::{BigInt, BigRational, One, Signed, Zero};

pub type QMatrix = Vec<Vec<BigRational>>;

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_q(m: &[Vec<u64>]) -> QMatrix {
    m.iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Integer matrix product `a * b` on machine naturals (counts of chains).
pub fn mul_u64(a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Applies `m` (rows x cols) to the integer vector `v` (length cols).
pub fn apply_int(m: &[Vec<u64>], v: &[BigInt]) -> Vec<BigInt> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(BigInt::zero(), |acc, (&a, x)| acc + BigInt::from(a) * x)
        })
        .collect()
}

/// Reduced row echelon form; returns pivot columns.
pub fn rref(m: &mut QMatrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let sub = &f * &m[r][j];
                    m[i][j] = &m[i][j] - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &QMatrix) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

/// Basis of the right kernel `{x : m x = 0}`.
pub fn kernel(m: &QMatrix) -> Vec<Vec<BigRational>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut w = m.clone();
    let pivots = rref(&mut w);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![BigRational::zero(); cols];
            x[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = -w[row][f].clone();
            }
            x
        })
        .collect()
}

/// Solves the square system `m x = b`; `None` when singular.
pub fn solve(m: &QMatrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = m.len();
    let mut aug: QMatrix = m
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut row = r.clone();
            row.push(bi.clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}

pub fn determinant(m: &QMatrix) -> BigRational {
    let n = m.len();
    let mut w = m.clone();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !w[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            w.swap(p, c);
            det = -det;
        }
        det = &det * &w[c][c];
        for i in c + 1..n {
            if !w[i][c].is_zero() {
                let f = &w[i][c] / &w[c][c];
                for j in c..n {
                    let sub = &f * &w[c][j];
                    w[i][j] = &w[i][j] - sub;
                }
            }
        }
    }
    det
}

/// True when some power `m^k` with `k <= (n-1)^2 + 1` is entrywise positive.
pub fn is_primitive(m: &[Vec<u64>]) -> bool {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return false;
    }
    let pattern: Vec<Vec<u64>> = m.iter().map(|r| r.iter().map(|&x| u64::from(x > 0)).collect()).collect();
    let mut p = pattern.clone();
    let bound = (n - 1) * (n - 1) + 1;
    for _ in 0..bound {
        if p.iter().all(|r| r.iter().all(|&x| x > 0)) {
            return true;
        }
        p = mul_u64(&p, &pattern)
            .into_iter()
            .map(|r| r.into_iter().map(|x| u64::from(x > 0)).collect())
            .collect();
    }
    false
}

/// Squarefree kernel of `n` (product of its distinct primes).
pub fn radical(mut n: u64) -> u64 {
    let mut r = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            r *= p;
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        r *= n;
    }
    r
}

pub fn is_nonneg(v: &[BigInt]) -> bool {
    v.iter().all(|x| !x.is_negative())
}

pub fn is_nonpos(v: &[BigInt]) -> bool {
    v.iter().all(|x| !x.is_positive())
}

/// Smallest `r >= sqrt(s)` on a coarse dyadic grid, verified exactly.
pub fn sqrt_upper(s: &BigRational) -> BigRational {
    if s.is_zero() {
        return BigRational::zero();
    }
    let approx = rational_to_f64(s).sqrt();
    let mut r = f64_to_rational(approx * (1.0 + 1e-12) + 1e-300);
    while &(&r * &r) < s {
        r = &r * q_frac(1_000_001, 1_000_000);
    }
    r
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn f64_to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}
