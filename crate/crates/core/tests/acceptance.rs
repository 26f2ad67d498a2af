//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits nonzero when any criterion fails. Each check compares library
//! output against an oracle computed here from first principles.

use std::collections::{HashMap, HashSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use adicfactor::catalog;
use adicfactor::dimgroup::{self, GroupExpr as G, TraceMode};
use adicfactor::dps::DpsAssignment;
use adicfactor::embedding::{EmbeddingPair, FibreClassification, PathProfile, SaturatedSet};
use adicfactor::finmodel;
use adicfactor::geometry;
use adicfactor::ifs::{self, Separation};
use adicfactor::kreport::{self, AttractorShape, Split};
use adicfactor::pathspace::{enumerate_paths, materialize, paths_equal, LazyPath, TailSpec};
use adicfactor::vershik::OrderedSystem;
use num::{BigInt, BigRational, One, Zero};

/// Coordinate tolerance for the circle regression.
const CIRCLE_TOL: f64 = 1e-9;
/// Sample count for every randomized regularity check.
const REGULARITY_SAMPLES: usize = 100;
const SEED: u64 = 20240611;

type Outcome = std::result::Result<String, String>;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow2(k: usize) -> BigRational {
    BigRational::from_integer(BigInt::one() << k)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: adicfactor::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn load_circles() -> HashMap<usize, Vec<(f64, f64, f64)>> {
    let text = include_str!("data/circles.txt");
    let mut out: HashMap<usize, Vec<(f64, f64, f64)>> = HashMap::new();
    for line in text.lines().filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty()) {
        let f: Vec<f64> = line.split_whitespace().map(|t| t.parse().expect("numeric field")).collect();
        out.entry(f[0] as usize).or_default().push((f[1], f[2], f[3]));
    }
    out
}

fn circles_match_reference() -> Outcome {
    let reference = load_circles();
    let mut counts = Vec::new();
    for (stage, expected) in [(3, 5), (4, 14), (5, 41), (6, 122)] {
        let got = lib(geometry::circles(stage))?;
        let want = &reference[&stage];
        ensure(got.len() == expected && want.len() == expected, || {
            format!("stage {stage}: {} circles, reference {}, expected {expected}", got.len(), want.len())
        })?;
        // multiset match: each computed circle consumes one reference entry
        let mut used = vec![false; want.len()];
        for c in &got {
            let hit = want.iter().enumerate().position(|(i, &(x, y, r))| {
                !used[i]
                    && (c.center.re - x).abs() <= CIRCLE_TOL
                    && (c.center.im - y).abs() <= CIRCLE_TOL
                    && (c.radius_f64() - r).abs() <= CIRCLE_TOL
            });
            match hit {
                Some(i) => used[i] = true,
                None => return Err(format!("stage {stage}: no reference circle for {c:?}")),
            }
        }
        counts.push(got.len().to_string());
    }
    Ok(format!("counts {}", counts.join("/")))
}

/// Integer oracle: with `H` the unnormalized `±1` Hadamard power and `v`
/// the all-ones first row, `v v* = 2^n e00`, `v* v = J` and `H e00 H = J`,
/// so the normalized identities hold exactly.
fn hadamard_oracle(n: usize) -> bool {
    let size = 1usize << n;
    let h = |i: usize, j: usize| if (i & j).count_ones() % 2 == 0 { 1i64 } else { -1 };
    let v = |i: usize, _j: usize| i64::from(i == 0);
    let mut ok = true;
    for i in 0..size {
        for j in 0..size {
            let vvs: i64 = (0..size).map(|k| v(i, k) * v(j, k)).sum();
            let svv: i64 = (0..size).map(|k| v(k, i) * v(k, j)).sum();
            let conj = h(i, 0) * h(0, j);
            ok &= vvs == if i == 0 && j == 0 { size as i64 } else { 0 };
            ok &= svv == 1 && conj == 1;
        }
    }
    ok
}

fn hadamard_identities() -> Outcome {
    for n in 1..=8 {
        let r = lib(finmodel::hadamard_verify(n))?;
        ensure(r.all_ok(), || format!("n={n}: {r:?}"))?;
        ensure(r.residuals == [0.0; 3], || format!("n={n}: nonzero residuals {:?}", r.residuals))?;
        ensure(hadamard_oracle(n), || format!("n={n}: integer oracle disagrees"))?;
    }
    Ok("n=1..8 exact".into())
}

fn odometer_enumerates_cylinders() -> Outcome {
    let d = catalog::two_infinity();
    let sys = lib(OrderedSystem::new(&d))?;
    for n in 1..=10 {
        let count = 1usize << n;
        let orbit = lib(sys.orbit(sys.xmin(), count as i64 - 1, count))?;
        let mut seen = HashSet::new();
        for x in &orbit {
            seen.insert(lib(materialize(&d, x, n))?);
        }
        let all: HashSet<Vec<usize>> = lib(enumerate_paths(&d, n))?.into_iter().collect();
        ensure(seen.len() == count && seen == all, || format!("n={n}: {} distinct cylinders", seen.len()))?;
    }
    let wrapped = lib(sys.vershik(sys.xmax()))?;
    ensure(lib(paths_equal(&d, &wrapped, sys.xmin()))?, || format!("max maps to {wrapped}"))?;
    Ok("n<=10, max -> min".into())
}

fn dimension_group_catalog() -> Outcome {
    let cases = [
        ("2^inf", catalog::two_infinity(), G::ZInv(2), q(1, 2)),
        ("4^inf", catalog::k_infinity(4), G::ZInv(2), q(1, 4)),
        ("single-edge", catalog::single_edge(), G::Z, q(1, 1)),
    ];
    for (name, d, group, ratio) in cases {
        let got = dimgroup::identify_group(&d).normalize();
        ensure(got == group, || format!("{name}: identified {got}, expected {group}"))?;
        let t = lib(dimgroup::trace(&d, TraceMode::Perron))?;
        let t = t.unique().ok_or_else(|| format!("{name}: trace not unique"))?;
        let mut expect = BigRational::one();
        for level in 0..=20 {
            let nu = lib(t.at(level))?;
            ensure(nu == vec![expect.clone()], || format!("{name}: level {level} weight {nu:?}"))?;
            let unit = lib(dimgroup::order_unit(&d, level))?;
            let p = lib(dimgroup::pairing(t, &unit))?;
            ensure(p.is_one(), || format!("{name}: pairing {p} at level {level}"))?;
            expect *= &ratio;
        }
    }
    Ok("groups, traces, pairing=1 to level 20".into())
}

/// Value of a binary path as a point of the circle `[0,1)`.
fn binary_value(prefix: &[usize], block: &[usize]) -> BigRational {
    let mut v = BigRational::zero();
    for (i, &b) in prefix.iter().enumerate() {
        if b == 1 {
            v += BigRational::one() / pow2(i + 1);
        }
    }
    // periodic block: value b/(2^len - 1) shifted past the prefix
    let mut num = BigInt::zero();
    for &b in block {
        num = (num << 1) + BigInt::from(b);
    }
    let period = (BigInt::one() << block.len()) - 1;
    v += BigRational::new(num, period) / pow2(prefix.len());
    let floor = v.floor();
    v - floor
}

/// The other binary expansion of a dyadic point, or `None` when the point
/// has only one.
fn other_expansion(prefix: &[usize], block: &[usize]) -> Option<LazyPath> {
    let v = binary_value(prefix, block);
    let den = v.denom().clone();
    if !den.is_one() && (den.clone() & (den.clone() - 1u32)) != BigInt::zero() {
        return None;
    }
    let k = den.bits() as usize - 1;
    let digits = |mut r: BigRational, len: usize| -> Vec<usize> {
        (0..len)
            .map(|_| {
                r *= q(2, 1);
                if r >= BigRational::one() {
                    r -= BigRational::one();
                    1
                } else {
                    0
                }
            })
            .collect()
    };
    let low = LazyPath::periodic(digits(v.clone(), k), vec![0]);
    let high = if v.is_zero() {
        LazyPath::periodic(vec![], vec![1])
    } else {
        LazyPath::periodic(digits(v - BigRational::one() / pow2(k), k), vec![1])
    };
    let ends_in = |b: usize| block.iter().all(|&x| x == b);
    Some(if ends_in(0) { high } else { low })
}

fn quotient_matches_binary_expansions() -> Outcome {
    let pair = catalog::binary_pair();
    let blocks: [&[usize]; 5] = [&[0], &[1], &[0, 1], &[0, 1, 1], &[0, 0, 1]];
    let mut cases = 0usize;
    let mut pairs = 0usize;
    for len in 0..=12 {
        for prefix in lib(enumerate_paths(pair.upper(), len))? {
            for block in blocks {
                let x = LazyPath::periodic(prefix.clone(), block.to_vec());
                let got = lib(pair.classify_fibre(&x))?;
                cases += 1;
                match (got, other_expansion(&prefix, block)) {
                    (FibreClassification::Singleton, None) => {}
                    (FibreClassification::Pair { partner, .. }, Some(want)) => {
                        pairs += 1;
                        ensure(lib(paths_equal(&pair, &partner, &want))?, || {
                            format!("{x}: partner {partner}, expansion oracle {want}")
                        })?;
                    }
                    (got, want) => return Err(format!("{x}: classified {got:?}, oracle {want:?}")),
                }
            }
        }
    }
    Ok(format!("{cases} paths, {pairs} two-point fibres"))
}

fn profiles(pair: &EmbeddingPair, depth: usize) -> std::result::Result<Vec<PathProfile>, String> {
    lib(pair.generating_family(depth, 2))?.iter().map(|x| lib(pair.profile(x))).collect()
}

fn saturation_on_ternary() -> Outcome {
    let pair = catalog::ternary_pair();
    let fam = profiles(&pair, 8)?;
    let partners: Vec<PathProfile> =
        fam.iter().map(|p| lib(pair.partner(&p.path)).and_then(|y| lib(pair.profile(&y)))).collect::<Result<_, _>>()?;
    let mut sets = Vec::new();
    for n in 1..=4 {
        let (a, b) = lib(pair.covering_families(n))?;
        sets.extend(a);
        sets.extend(b);
    }
    sets.extend(lib(pair.enumerate_p(4))?.into_iter().map(SaturatedSet::Circle));
    for s in &sets {
        lib(pair.validate_set(s))?;
        for (x, y) in fam.iter().zip(&partners) {
            ensure(pair.contains(s, x) == pair.contains(s, y), || format!("{s:?} separates {} from its partner", x.path))?;
        }
    }
    Ok(format!("{} sets over {} paths", sets.len(), fam.len()))
}

fn covering_families_on_ternary() -> Outcome {
    let pair = catalog::ternary_pair();
    let fam = profiles(&pair, 8)?;
    for n in 1..=6 {
        let (a, b) = lib(pair.covering_families(n))?;
        for x in &fam {
            let ha = a.iter().filter(|s| pair.contains(s, x)).count();
            let hb = b.iter().filter(|s| pair.contains(s, x)).count();
            ensure(ha <= 1 && hb <= 1, || format!("n={n}: {} in {ha}+{hb} sets", x.path))?;
            ensure(ha + hb >= 1, || format!("n={n}: {} uncovered", x.path))?;
        }
    }
    Ok(format!("n<=6 over {} paths", fam.len()))
}

fn ifs_verdicts() -> Outcome {
    match ifs::strong_separation(&catalog::middle_thirds(), 2) {
        Separation::Separated { gap, .. } if gap == q(1, 3) => {}
        other => return Err(format!("middle thirds: {other:?}")),
    }
    // overlap certificates: the point lies in a level-8 cell of each named map
    for (name, sys) in [("halves", catalog::halves()), ("sierpinski", catalog::sierpinski())] {
        match ifs::strong_separation(&sys, 2) {
            Separation::Overlapping { point, first, second } => {
                ensure(first != second, || format!("{name}: same map twice"))?;
                let cells = ifs::attractor_cells(&sys, 8);
                for m in [first, second] {
                    let hit = cells.cells.iter().any(|c| {
                        c.word[0] == m && c.bbox.as_ref().is_some_and(|b| b.contains_point(&point))
                    });
                    ensure(hit, || format!("{name}: {point:?} outside the image of map {m}"))?;
                }
            }
            other => return Err(format!("{name}: {other:?}")),
        }
    }
    for (name, sys) in [
        ("middle thirds", catalog::middle_thirds()),
        ("halves", catalog::halves()),
        ("sierpinski", catalog::sierpinski()),
    ] {
        let lambda = sys.lambda();
        let hull = sys.hull_diameter_sq();
        let mut scale = BigRational::one();
        for n in 0..=8 {
            let cells = ifs::attractor_cells(&sys, n);
            ensure(cells.cells.len() == sys.map_count().pow(n as u32), || format!("{name}: cell count at {n}"))?;
            let want = &hull * &scale;
            ensure(cells.cells.iter().all(|c| c.diameter_sq == want), || format!("{name}: diameters at level {n}"))?;
            scale = scale * &lambda * &lambda;
        }
    }
    Ok("separated(1/3), two overlaps, lambda^n diameters to n=8".into())
}

fn dps_regularity() -> Outcome {
    let a: DpsAssignment = catalog::interval_assignment();
    let paths = [
        ("all-max", LazyPath::new(vec![], TailSpec::AllMax)),
        ("identity tail", LazyPath::new(vec![0], TailSpec::AllIdentity)),
    ];
    ensure(lib(a.identity_tail_start(&paths[0].1))?.is_none(), || "all-max path ends in identities".into())?;
    ensure(lib(a.identity_tail_start(&paths[1].1))?.is_some(), || "identity tail not recognized".into())?;
    let mut ks = Vec::new();
    for (name, x) in &paths {
        for den in [4, 16, 64] {
            let w = lib(a.regularity_witness(x, &q(1, den), REGULARITY_SAMPLES, SEED))?;
            ensure(w.verified && w.samples >= REGULARITY_SAMPLES, || format!("{name}, eps 1/{den}: {w:?}"))?;
            ensure(w.diameter_hits + w.hausdorff_hits >= w.samples, || format!("{name}, eps 1/{den}: {w:?}"))?;
            ks.push(w.k.to_string());
        }
    }
    Ok(format!("k = {}", ks.join(",")))
}

fn ktheory_catalog() -> Outcome {
    let r = lib(kreport::factor_invariants(&catalog::binary_pair()))?;
    ensure((r.k0.clone(), r.k1.clone()) == (G::ZInv(2), G::Z), || format!("binary pair: {} / {}", r.k0, r.k1))?;
    let r = lib(kreport::factor_invariants(&catalog::quaternary_pair()))?;
    ensure((r.k0.clone(), r.k1.clone()) == (G::ZInv(2), G::ZInv(2)), || format!("quaternary pair: {} / {}", r.k0, r.k1))?;

    for m in 1..=3 {
        let r = lib(kreport::dps_invariants(&catalog::cube_assignment(m), Some(AttractorShape::Cube(m)), None))?;
        ensure(r.sequences.iter().all(|s| s.left_iso && s.split == Split::Yes), || format!("cube {m}: {:?}", r.sequences))?;
        let base = dimgroup::identify_group(catalog::cube_assignment(m).diagram());
        ensure(r.k0 == base && r.k1 == G::Z, || format!("cube {m}: {} / {}", r.k0, r.k1))?;
    }

    let shift = lib(DpsAssignment::full_words(lib(ifs::code_space_system(2))?))?;
    let r = lib(kreport::dps_invariants(&shift, Some(AttractorShape::CantorShift(2)), None))?;
    let cz = G::ContFuncZ("{0,1}^N".into());
    ensure(r.sequences[0].right == G::quotient(cz, G::Z), || format!("shift: {}", r.sequences[0]))?;
    ensure(r.k1 == G::Z, || format!("shift K1 {}", r.k1))?;

    let sier = lib(DpsAssignment::full_words(catalog::sierpinski()))?;
    let r = lib(kreport::dps_invariants(&sier, Some(AttractorShape::Sierpinski), None))?;
    ensure(r.k1 == G::sum(vec![G::Z, G::ZInf]), || format!("sierpinski K1 {}", r.k1))?;
    ensure(r.sequences[1].split == Split::Yes, || format!("sierpinski: {}", r.sequences[1]))?;

    let carpet = lib(DpsAssignment::full_words(catalog::carpet_cube()))?;
    let r = lib(kreport::dps_invariants(&carpet, Some(AttractorShape::CarpetCube), None))?;
    let base = dimgroup::identify_group(carpet.diagram());
    ensure(r.k0 == G::sum(vec![base, G::ZInf]), || format!("carpet K0 {}", r.k0))?;
    ensure(r.k1 == G::Z, || format!("carpet K1 {}", r.k1))?;
    Ok("factor and extension groups".into())
}

fn measure_vanishing() -> Outcome {
    let pair = catalog::quaternary_pair();
    let mut prev: Option<BigRational> = None;
    for m in 1..=20 {
        let r = lib(kreport::measure_vanishing(&pair, &[], m))?;
        // oracle: 2^m of the 4^m equally weighted level-m cylinders stay in the first copy
        let want = pow2(m) / (pow2(m) * pow2(m));
        ensure(r.mu == want, || format!("m={m}: measure {}, oracle {want}", r.mu))?;
        ensure(r.ok && r.mu <= BigRational::one() / pow2(m), || format!("m={m}: {} > {}", r.mu, r.bound))?;
        if let Some(p) = &prev {
            ensure(&r.mu <= p, || format!("m={m}: measure increased"))?;
        }
        prev = Some(r.mu);
    }
    Ok("m<=20 exact".into())
}

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { name: "circle regression (tol 1e-9)", budget: secs(1), run: circles_match_reference },
        Criterion { name: "Hadamard partial isometry", budget: secs(1), run: hadamard_identities },
        Criterion { name: "odometer enumerates cylinders", budget: secs(1), run: odometer_enumerates_cylinders },
        Criterion { name: "dimension group catalog", budget: None, run: dimension_group_catalog },
        Criterion { name: "quotient vs binary expansions", budget: secs(10), run: quotient_matches_binary_expansions },
        Criterion { name: "saturated sets on the ternary pair", budget: secs(30), run: saturation_on_ternary },
        Criterion { name: "covering families", budget: secs(30), run: covering_families_on_ternary },
        Criterion { name: "IFS verdicts and cell diameters", budget: None, run: ifs_verdicts },
        Criterion { name: "DPS regularity", budget: secs(30), run: dps_regularity },
        Criterion { name: "K-theory catalog", budget: None, run: ktheory_catalog },
        Criterion { name: "measure vanishing", budget: None, run: measure_vanishing },
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {} ({detail}; {elapsed:.2?})", i + 1, c.name),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {}: {} ({why}; {elapsed:.2?})", i + 1, c.name)
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
