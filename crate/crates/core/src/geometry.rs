//! Planar pictures of the quotient for the ternary pair: each circle prefix
//! is sent to a circle in the plane by a composition of similarity maps,
//! and an infinite path in the matching circle set lands on that circle at
//! the angle given by its binary tail. Also renders the other catalog
//! scenes and a schematic of arbitrary diagrams as SVG.

use std::fmt::Write as _;

use num::complex::Complex64;
use num::{BigInt, BigRational, One, ToPrimitive, Zero};

use crate::catalog;
use crate::diagram::BratteliDiagram;
use crate::embedding::EmbeddingPair;
use crate::error::{Error, Result};
use crate::pathspace::{canonicalize, LazyPath, TailSpec};

/// Internal tolerance for floating comparisons.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    /// Radius as `2^-scale`.
    pub scale: usize,
}

impl Circle {
    pub fn radius(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << self.scale)
    }

    pub fn radius_f64(&self) -> f64 {
        (-(self.scale as f64)).exp2()
    }

    /// Strictly apart: centers farther than the sum of radii.
    pub fn disjoint_from(&self, other: &Circle) -> bool {
        (self.center - other.center).norm() > self.radius_f64() + other.radius_f64() + TOLERANCE
    }
}

/// One similarity step `z -> e^(2 pi i theta) (z / 2^len + 1 + 2 / 2^len)`
/// attached to a block of binary digits closed by the middle edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMap {
    pub len: usize,
    pub theta: BigRational,
}

impl BlockMap {
    pub fn apply(&self, z: Complex64) -> Complex64 {
        let s = (-(self.len as f64)).exp2();
        turn(&self.theta) * (z * s + (1.0 + 2.0 * s))
    }
}

/// `e^(2 pi i t)`, exact at quarter turns.
pub fn turn(t: &BigRational) -> Complex64 {
    let frac = t - t.floor();
    let four = &frac * BigRational::from_integer(4.into());
    if four.is_integer() {
        return match four.to_integer().to_u8() {
            Some(0) => Complex64::new(1.0, 0.0),
            Some(1) => Complex64::new(0.0, 1.0),
            Some(2) => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let a = 2.0 * std::f64::consts::PI * frac.to_f64().unwrap_or(0.0);
    Complex64::new(a.cos(), a.sin())
}

fn dyadic(k: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

/// Angle of a block `(d_1, .., d_{n-1}, 2)` with binary digits `d_k`: zero
/// for the lone middle edge, else `2^-n + sum d_k 2^-k`.
pub fn theta(block: &[usize]) -> Result<BigRational> {
    let n = block.len();
    if n == 0 || block[n - 1] != 2 || block[..n - 1].iter().any(|&d| d > 1) {
        return Err(Error::Geometry(format!("{block:?} is not binary digits closed by the middle edge")));
    }
    if n == 1 {
        return Ok(BigRational::zero());
    }
    let mut t = dyadic(n);
    for (k, &d) in block[..n - 1].iter().enumerate() {
        if d == 1 {
            t += dyadic(k + 1);
        }
    }
    Ok(t)
}

/// Splits a circle prefix into blocks each closed by the middle edge.
pub fn blocks(p: &[usize]) -> Result<Vec<&[usize]>> {
    if p.last().is_some_and(|&e| e != 2) {
        return Err(Error::Geometry("prefix must end with the middle edge".into()));
    }
    if p.iter().any(|&e| e > 2) {
        return Err(Error::Geometry("edge labels must be 0, 1 or 2".into()));
    }
    Ok(p.split_inclusive(|&e| e == 2).collect())
}

/// The similarity maps of `p`, outermost first.
pub fn prefix_maps(p: &[usize]) -> Result<Vec<BlockMap>> {
    blocks(p)?.into_iter().map(|b| Ok(BlockMap { len: b.len(), theta: theta(b)? })).collect()
}

/// The composed map of a circle prefix applied to `z`.
pub fn f_p(p: &[usize], z: Complex64) -> Result<Complex64> {
    Ok(prefix_maps(p)?.iter().rev().fold(z, |w, m| m.apply(w)))
}

fn ternary_pair() -> EmbeddingPair {
    catalog::ternary_pair()
}

/// Image in the plane of a path whose edges are eventually all embedded.
pub fn rho_point(x: &LazyPath) -> Result<Complex64> {
    let pair = ternary_pair();
    let prof = pair.profile(x)?;
    if !prof.embedded_from(prof.path.prefix.len() + 1) {
        return Err(Error::Geometry("path uses the middle edge infinitely often".into()));
    }
    let n = (1..=prof.path.prefix.len()).rev().find(|&k| prof.edge(k) == 2).unwrap_or(0);
    let p = prof.first_edges(n);
    let angle = binary_tail(&prof.path, n)?;
    f_p(&p, turn(&angle))
}

/// `sum_{k > n} x_k 2^-k` for a path with only binary digits past `n`,
/// summing the periodic part as a geometric series.
fn binary_tail(x: &LazyPath, n: usize) -> Result<BigRational> {
    let pair = ternary_pair();
    let x = canonicalize(&pair, x)?;
    let TailSpec::Periodic(block) = &x.tail else {
        return Err(Error::Geometry("tail has no periodic form".into()));
    };
    let q = x.prefix.len();
    let mut sum = BigRational::zero();
    for k in n + 1..=q {
        sum += BigRational::from_integer(x.prefix[k - 1].into()) * dyadic(k);
    }
    let per = block.len();
    let mut cycle = BigRational::zero();
    for (i, &d) in block.iter().enumerate() {
        cycle += BigRational::from_integer(d.into()) * dyadic(q + i + 1);
    }
    let ratio = BigRational::one() - dyadic(per);
    Ok(sum + cycle / ratio)
}

/// Images of the unit circle under all circle prefixes of length below `stage`.
pub fn circles(stage: usize) -> Result<Vec<Circle>> {
    let pair = ternary_pair();
    let max_len = stage.saturating_sub(1);
    let mut out = Vec::new();
    for p in pair.enumerate_p(max_len)? {
        out.push(Circle { center: f_p(&p, Complex64::new(0.0, 0.0))?, scale: p.len() });
    }
    Ok(out)
}

/// Primitives of a picture in world coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scene {
    /// `(center, radius)`
    pub circles: Vec<(Complex64, f64)>,
    pub dots: Vec<Complex64>,
    pub segments: Vec<(Complex64, Complex64)>,
    pub labels: Vec<(Complex64, String)>,
}

impl Scene {
    pub fn from_circles(cs: &[Circle]) -> Scene {
        Scene { circles: cs.iter().map(|c| (c.center, c.radius_f64())).collect(), ..Scene::default() }
    }
}

/// The ternary picture at `stage`.
pub fn ternary_scene(stage: usize) -> Result<Scene> {
    Ok(Scene::from_circles(&circles(stage)?))
}

/// Concentric circles of radius `2^-n` for `n <= depth` and the center point.
pub fn shrinking_scene(depth: usize) -> Scene {
    let o = Complex64::new(0.0, 0.0);
    Scene {
        circles: (0..=depth).map(|n| (o, (-(n as f64)).exp2())).collect(),
        dots: vec![o],
        ..Scene::default()
    }
}

/// Circles through the `2^depth` left endpoints of the middle-thirds
/// construction on `[1, 2]`.
pub fn cantor_scene(depth: usize) -> Scene {
    let o = Complex64::new(0.0, 0.0);
    let circles = (0..1usize << depth)
        .map(|bits| {
            let r: f64 = (0..depth)
                .map(|k| if bits >> (depth - 1 - k) & 1 == 1 { 2.0 * 3f64.powi(-(k as i32) - 1) } else { 0.0 })
                .sum();
            (o, 1.0 + r)
        })
        .collect();
    Scene { circles, ..Scene::default() }
}

/// Vertices as dots on a grid (level across, vertex index down) joined by
/// one segment per edge; a drawing aid with no geometric meaning.
pub fn schematic_scene(d: &BratteliDiagram, depth: usize) -> Scene {
    let mut s = Scene::default();
    let place = |n: usize, v: usize, count: usize| {
        Complex64::new(n as f64, -(v as f64) + (count as f64 - 1.0) / 2.0)
    };
    let depth = d.depth().map_or(depth, |dd| dd.min(depth));
    for n in 0..=depth {
        let count = d.vertex_count(n);
        for v in 0..count {
            let at = place(n, v, count);
            s.dots.push(at);
            s.labels.push((at, format!("{n}.{v}")));
        }
        if n >= 1 {
            let prev = d.vertex_count(n - 1);
            for i in 0..d.edge_count(n) {
                let e = d.edge(n, i);
                s.segments.push((place(n - 1, e.source, prev), place(n, e.target, count)));
            }
        }
    }
    s
}

/// Catalog scene by example name.
pub fn catalog_scene(name: &str, stage: usize) -> Result<Scene> {
    match name {
        "ternary" => ternary_scene(stage),
        "shrinking" => Ok(shrinking_scene(stage)),
        "cantor" => Ok(cantor_scene(stage)),
        "figure-two" => Ok(schematic_scene(&catalog::figure_two(), stage)),
        _ => Err(Error::Parse(format!("unknown scene {name:?}"))),
    }
}

pub const VIEWPORT: f64 = 1000.0;
const MARGIN: f64 = 40.0;

fn num(x: f64) -> String {
    let s = format!("{x:.9}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000000".into()
    } else {
        s
    }
}

/// Deterministic SVG: fixed viewport, world box fitted with a margin,
/// circles ordered by radius then by the angle of their center.
pub fn render_svg(scene: &Scene) -> String {
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    for (c, r) in &scene.circles {
        pts.push((c.re, c.im, *r));
    }
    for d in &scene.dots {
        pts.push((d.re, d.im, 0.0));
    }
    for (a, b) in &scene.segments {
        pts.push((a.re, a.im, 0.0));
        pts.push((b.re, b.im, 0.0));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y, r) in &pts {
        x0 = x0.min(x - r);
        x1 = x1.max(x + r);
        y0 = y0.min(y - r);
        y1 = y1.max(y + r);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(TOLERANCE);
    let scale = (VIEWPORT - 2.0 * MARGIN) / span;
    let cx = (x0 + x1) / 2.0;
    let cy = (y0 + y1) / 2.0;
    let sx = |x: f64| VIEWPORT / 2.0 + (x - cx) * scale;
    let sy = |y: f64| VIEWPORT / 2.0 - (y - cy) * scale;

    let mut circles = scene.circles.clone();
    circles.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then(a.0.im.atan2(a.0.re).total_cmp(&b.0.im.atan2(b.0.re)))
            .then(a.0.norm().total_cmp(&b.0.norm()))
    });
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{v}\" height=\"{v}\" viewBox=\"0 0 {v} {v}\">",
        v = VIEWPORT as u32
    );
    out.push_str("<rect x=\"0\" y=\"0\" width=\"1000\" height=\"1000\" fill=\"white\"/>\n");
    for (a, b) in &scene.segments {
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1\"/>",
            num(sx(a.re)),
            num(sy(a.im)),
            num(sx(b.re)),
            num(sy(b.im))
        );
    }
    for (c, r) in &circles {
        let _ = writeln!(
            out,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>",
            num(sx(c.re)),
            num(sy(c.im)),
            num(r * scale)
        );
    }
    for d in &scene.dots {
        let _ = writeln!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"black\"/>", num(sx(d.re)), num(sy(d.im)));
    }
    for (at, text) in &scene.labels {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>",
            num(sx(at.re) + 5.0),
            num(sy(at.im) - 5.0),
            text
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Number of `<circle` elements with no fill (the drawn circles).
pub fn count_circles(svg: &str) -> usize {
    svg.matches("fill=\"none\"").count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q_frac;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-9
    }

    #[test]
    fn block_angles() {
        assert_eq!(theta(&[2]).unwrap(), BigRational::zero());
        assert_eq!(theta(&[0, 2]).unwrap(), q_frac(1, 4));
        assert_eq!(theta(&[1, 2]).unwrap(), q_frac(3, 4));
        assert!(theta(&[2, 0]).is_err());
    }

    #[test]
    fn composed_maps() {
        let z = Complex64::new(0.3, -0.7);
        assert!(close(f_p(&[], z).unwrap(), z));
        assert!(close(f_p(&[2], Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(2.0, 0.0)));
        assert!(close(f_p(&[2, 2], z).unwrap(), z / 4.0 + 3.0));
        assert!(f_p(&[2, 0], z).is_err());
    }

    #[test]
    fn points_on_circles() {
        let x = LazyPath::periodic(vec![2], vec![0]);
        assert!(close(rho_point(&x).unwrap(), Complex64::new(2.5, 0.0)));
        let a = LazyPath::periodic(vec![2, 1], vec![0]);
        let b = LazyPath::periodic(vec![2, 0], vec![1]);
        assert!(close(rho_point(&a).unwrap(), rho_point(&b).unwrap()));
        assert!(close(rho_point(&LazyPath::periodic(vec![], vec![0])).unwrap(), Complex64::new(1.0, 0.0)));
        assert!(rho_point(&LazyPath::periodic(vec![], vec![2, 0])).is_err());
    }

    #[test]
    fn circle_counts_and_disjointness() {
        let counts: Vec<usize> = (1..=6).map(|n| circles(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 14, 41, 122]);
        let cs = circles(6).unwrap();
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                assert!(cs[i].disjoint_from(&cs[j]), "{:?} {:?}", cs[i], cs[j]);
            }
        }
    }

    #[test]
    fn svg_is_deterministic() {
        let s = render_svg(&ternary_scene(3).unwrap());
        assert_eq!(count_circles(&s), 5);
        assert_eq!(s, render_svg(&ternary_scene(3).unwrap()));
        assert_eq!(count_circles(&render_svg(&shrinking_scene(4))), 5);
        let empty = render_svg(&Scene::default());
        assert!(empty.starts_with("<?xml") && empty.ends_with("</svg>\n"));
        assert_eq!(count_circles(&empty), 0);
    }
}
