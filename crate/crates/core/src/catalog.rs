//! Built-in diagrams, embedding pairs and edge-function assignments used by
//! the examples, the CLI and the test suites.

use crate::diagram::{BratteliDiagram, Edge};
use crate::dps::DpsAssignment;
use crate::embedding::EmbeddingPair;
use crate::error::{Error, Result};
use crate::ifs::{code_space_system, AffineMap, AffineSystem, BoxRegion, IfsSystem};
use crate::linalg::{q, q_frac};

/// One vertex per level and `k` edges per level, ranked by index.
pub fn k_infinity(k: usize) -> BratteliDiagram {
    let edges = (0..k).map(|r| Edge::new(0, 0, r)).collect();
    BratteliDiagram::new(vec![1, 1], vec![edges], Some(1)).expect("well-formed")
}

/// The binary odometer diagram.
pub fn two_infinity() -> BratteliDiagram {
    k_infinity(2)
}

/// One vertex and one edge per level.
pub fn single_edge() -> BratteliDiagram {
    k_infinity(1)
}

/// Two vertices per level with incidence matrix `[[1,1],[1,0]]` from level 2 on.
pub fn fibonacci() -> BratteliDiagram {
    BratteliDiagram::new(
        vec![1, 2, 2],
        vec![
            vec![Edge::new(0, 0, 0), Edge::new(0, 1, 0)],
            vec![Edge::new(0, 0, 0), Edge::new(1, 0, 1), Edge::new(0, 1, 0)],
        ],
        Some(2),
    )
    .expect("well-formed")
}

/// Two vertices per level: the top vertex continues along the top and
/// sends one diagonal edge down; the bottom vertex has a double edge to
/// the next bottom vertex. The root has one edge to the top and two to the
/// bottom.
pub fn figure_two() -> BratteliDiagram {
    BratteliDiagram::new(
        vec![1, 2, 2],
        vec![
            vec![Edge::new(0, 0, 0), Edge::new(0, 1, 0), Edge::new(0, 1, 1)],
            vec![
                Edge::new(0, 0, 0),
                Edge::new(0, 1, 1),
                Edge::new(1, 1, 0),
                Edge::new(1, 1, 2),
            ],
        ],
        Some(2),
    )
    .expect("well-formed")
}

/// Single vertex with `2^(m n) + 1` edges at level `n`.
pub fn odometer_catalog(m: u32) -> BratteliDiagram {
    BratteliDiagram::odometer(1u64 << m, 1).expect("base at least 2")
}

fn single_edge_into(upper: BratteliDiagram, vertex_map: Vec<Vec<usize>>, left: Vec<Vec<usize>>, right: Vec<Vec<usize>>) -> EmbeddingPair {
    EmbeddingPair::new(single_edge(), upper, vertex_map, [left, right]).expect("well-formed")
}

/// The binary diagram covered by two copies of the single-edge diagram.
pub fn binary_pair() -> EmbeddingPair {
    single_edge_into(two_infinity(), vec![vec![0], vec![0]], vec![vec![0]], vec![vec![1]])
}

/// Three edges per level; the outer two are embedded and the middle one is not.
pub fn ternary_pair() -> EmbeddingPair {
    single_edge_into(k_infinity(3), vec![vec![0], vec![0]], vec![vec![0]], vec![vec![1]])
}

/// Four edges per level holding two disjoint copies of the binary diagram.
pub fn quaternary_pair() -> EmbeddingPair {
    EmbeddingPair::new(two_infinity(), k_infinity(4), vec![vec![0], vec![0]], [vec![vec![0, 1]], vec![vec![2, 3]]])
        .expect("well-formed")
}

/// The single-edge diagram embedded twice along the bottom row of
/// [`figure_two`].
pub fn figure_two_pair() -> EmbeddingPair {
    single_edge_into(
        figure_two(),
        vec![vec![0], vec![1], vec![1]],
        vec![vec![1], vec![2]],
        vec![vec![2], vec![3]],
    )
}

fn affine_1d(maps: &[(i64, i64, i64, i64)]) -> IfsSystem {
    // (scale num, scale den, offset num, offset den)
    let maps = maps.iter().map(|&(a, b, c, d)| AffineMap::scalar(q_frac(a, b), vec![q_frac(c, d)])).collect();
    IfsSystem::Affine(AffineSystem::new(maps, Some(BoxRegion::unit(1))).expect("contractive"))
}

/// `{x/3, x/3 + 2/3}` on `[0, 1]`.
pub fn middle_thirds() -> IfsSystem {
    affine_1d(&[(1, 3, 0, 1), (1, 3, 2, 3)])
}

/// `{x/2, x/2 + 1/2}` on `[0, 1]`; the attractor is the whole interval.
pub fn halves() -> IfsSystem {
    affine_1d(&[(1, 2, 0, 1), (1, 2, 1, 2)])
}

/// A single map `x/2` on `[0, 1]`; the attractor is a point.
pub fn single_point() -> IfsSystem {
    affine_1d(&[(1, 2, 0, 1)])
}

/// Three half-scale maps of the unit square with offsets `0`, `(1/2, 0)`
/// and `(1/4, 1/2)`.
pub fn sierpinski() -> IfsSystem {
    let h = q_frac(1, 2);
    let maps = vec![
        AffineMap::scalar(h.clone(), vec![q(0), q(0)]),
        AffineMap::scalar(h.clone(), vec![q_frac(1, 2), q(0)]),
        AffineMap::scalar(h, vec![q_frac(1, 4), q_frac(1, 2)]),
    ];
    IfsSystem::Affine(AffineSystem::new(maps, Some(BoxRegion::unit(2))).expect("contractive"))
}

/// The `2^m` half-scale maps of the unit cube onto its dyadic subcubes,
/// indexed by the binary digits of the corner (first axis most significant).
pub fn cube_ifs(m: usize) -> IfsSystem {
    let maps = (0..1usize << m)
        .map(|i| {
            let offset = (0..m).map(|a| if i >> (m - 1 - a) & 1 == 1 { q_frac(1, 2) } else { q(0) }).collect();
            AffineMap::scalar(q_frac(1, 2), offset)
        })
        .collect();
    IfsSystem::Affine(AffineSystem::new(maps, Some(BoxRegion::unit(m))).expect("contractive"))
}

/// Every word of length `n` on the level-`n` edges of [`odometer_catalog`],
/// with the middle edge as the identity.
pub fn cube_assignment(m: usize) -> DpsAssignment {
    DpsAssignment::full_words(cube_ifs(m)).expect("at least two maps")
}

/// [`cube_assignment`] over the interval.
pub fn interval_assignment() -> DpsAssignment {
    cube_assignment(1)
}

/// The 26 third-scale maps of the unit cube onto its subcubes, all but the
/// centre one.
pub fn carpet_cube() -> IfsSystem {
    let mut maps = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                if (i, j, k) != (1, 1, 1) {
                    maps.push(AffineMap::scalar(q_frac(1, 3), vec![q_frac(i, 3), q_frac(j, 3), q_frac(k, 3)]));
                }
            }
        }
    }
    IfsSystem::Affine(AffineSystem::new(maps, Some(BoxRegion::unit(3))).expect("contractive"))
}

fn split_arg(name: &str) -> (&str, Option<usize>) {
    match name.split_once(':') {
        Some((n, a)) => (n, a.parse().ok()),
        None => (name, None),
    }
}

fn unknown(kind: &str, name: &str) -> Error {
    Error::Parse(format!("unknown {kind} {name:?}"))
}

/// Diagrams by name: `binary`, `single-edge`, `fibonacci`, `figure-two`,
/// `k:<edges>` and `odometer:<m>`.
pub fn diagram_named(name: &str) -> Result<BratteliDiagram> {
    match split_arg(name) {
        ("binary", None) => Ok(two_infinity()),
        ("single-edge", None) => Ok(single_edge()),
        ("fibonacci", None) => Ok(fibonacci()),
        ("figure-two", None) => Ok(figure_two()),
        ("k", Some(k)) if k >= 1 => Ok(k_infinity(k)),
        ("odometer", Some(m)) if (1..=16).contains(&m) => Ok(odometer_catalog(m as u32)),
        _ => Err(unknown("diagram", name)),
    }
}

/// Embedding pairs by name: `binary`, `ternary`, `quaternary`, `figure-two`.
pub fn pair_named(name: &str) -> Result<EmbeddingPair> {
    match name {
        "binary" => Ok(binary_pair()),
        "ternary" => Ok(ternary_pair()),
        "quaternary" => Ok(quaternary_pair()),
        "figure-two" => Ok(figure_two_pair()),
        _ => Err(unknown("pair", name)),
    }
}

/// Function systems by name: `middle-thirds`, `halves`, `single-point`,
/// `sierpinski`, `carpet-cube`, `cube:<m>` and `shift:<k>`.
pub fn ifs_named(name: &str) -> Result<IfsSystem> {
    match split_arg(name) {
        ("middle-thirds", None) => Ok(middle_thirds()),
        ("halves", None) => Ok(halves()),
        ("single-point", None) => Ok(single_point()),
        ("sierpinski", None) => Ok(sierpinski()),
        ("carpet-cube", None) => Ok(carpet_cube()),
        ("cube", Some(m)) if (1..=4).contains(&m) => Ok(cube_ifs(m)),
        ("shift", Some(k)) => code_space_system(k),
        _ => Err(unknown("system", name)),
    }
}

/// Full-word assignments by name: `interval`, or any system name accepted
/// by [`ifs_named`] with at least two maps.
pub fn assignment_named(name: &str) -> Result<DpsAssignment> {
    if name == "interval" {
        return Ok(interval_assignment());
    }
    DpsAssignment::full_words(ifs_named(name)?)
}
