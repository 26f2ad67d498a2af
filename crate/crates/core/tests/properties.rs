use adicfactor::catalog;
use adicfactor::embedding::FibreClassification;
use adicfactor::finmodel::{DyadicMatrix, FiniteGroupoidFn};
use adicfactor::io;
use adicfactor::kreport;
use adicfactor::pathspace::{canonicalize, LazyPath, TailSpec};
use adicfactor::vershik::OrderedSystem;
use num::{BigInt, BigRational, One};
use proptest::prelude::*;

/// Classes on up to 8 points and a matrix supported on the relation.
fn relation_fn() -> impl Strategy<Value = (Vec<usize>, Vec<Vec<i64>>, u32)> {
    (1usize..=8).prop_flat_map(|n| {
        (
            prop::collection::vec(0usize..3, n),
            prop::collection::vec(prop::collection::vec(-4i64..=4, n), n),
            0u32..4,
        )
    })
}

fn masked(classes: &[usize], m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = classes.len();
    (0..n).map(|i| (0..n).map(|j| if classes[i] == classes[j] { m[i][j] } else { 0 }).collect()).collect()
}

fn groupoid_fn(classes: &[usize], m: &[Vec<i64>], scale: u32) -> FiniteGroupoidFn {
    FiniteGroupoidFn::new(classes.to_vec(), DyadicMatrix::from_integers(&masked(classes, m), scale).unwrap()).unwrap()
}

fn path_on(k: usize) -> impl Strategy<Value = LazyPath> {
    (prop::collection::vec(0..k, 0..8), prop::collection::vec(0..k, 1..4))
        .prop_map(|(prefix, block)| LazyPath::periodic(prefix, block))
}

proptest! {
    #[test]
    fn convolution_is_the_matrix_product((classes, a, s) in relation_fn(), seed in any::<u64>()) {
        let n = classes.len();
        let b: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| ((seed >> ((i * n + j) % 60)) & 7) as i64 - 3).collect()).collect();
        let f = groupoid_fn(&classes, &a, s);
        let g = groupoid_fn(&classes, &b, 1);
        let conv = f.convolve(&g).unwrap();
        let prod = f.values().mul(g.values()).unwrap();
        prop_assert!(conv.values().same_as(&prod).unwrap());
    }

    #[test]
    fn adjoint_reverses_convolution((classes, a, s) in relation_fn()) {
        let f = groupoid_fn(&classes, &a, s);
        let g = groupoid_fn(&classes, &a.iter().rev().cloned().collect::<Vec<_>>(), 0);
        let lhs = f.convolve(&g).unwrap().adjoint();
        let rhs = g.adjoint().convolve(&f.adjoint()).unwrap();
        prop_assert!(lhs.values().same_as(rhs.values()).unwrap());
        prop_assert_eq!(f.adjoint().adjoint(), f);
    }

    #[test]
    fn arrow_indicators_compose(classes in prop::collection::vec(0usize..2, 1..=8), picks in prop::collection::vec(any::<prop::sample::Index>(), 3)) {
        let n = classes.len();
        let i = picks[0].index(n);
        let same: Vec<usize> = (0..n).filter(|&j| classes[j] == classes[i]).collect();
        let (j, k) = (same[picks[1].index(same.len())], same[picks[2].index(same.len())]);
        let a = FiniteGroupoidFn::indicator(classes.clone(), i, j).unwrap();
        let b = FiniteGroupoidFn::indicator(classes.clone(), j, k).unwrap();
        prop_assert_eq!(a.convolve(&b).unwrap(), FiniteGroupoidFn::indicator(classes, i, k).unwrap());
    }

    #[test]
    fn kron_is_multiplicative(a in prop::collection::vec(-3i64..=3, 4), b in prop::collection::vec(-3i64..=3, 4)) {
        let m = |v: &[i64]| DyadicMatrix::from_integers(&[v[..2].to_vec(), v[2..].to_vec()], 1).unwrap();
        let (x, y) = (m(&a), m(&b));
        let lhs = x.kron(&y).unwrap().mul(&y.kron(&x).unwrap()).unwrap();
        let rhs = x.mul(&y).unwrap().kron(&y.mul(&x).unwrap()).unwrap();
        prop_assert!(lhs.same_as(&rhs).unwrap());
    }

    #[test]
    fn vershik_inverse_undoes_a_step(k in 2usize..=4, x in path_on(4)) {
        let d = catalog::k_infinity(k);
        let x = LazyPath::new(x.prefix.iter().map(|e| e % k).collect(), match x.tail {
            TailSpec::Periodic(b) => TailSpec::Periodic(b.iter().map(|e| e % k).collect()),
            t => t,
        });
        let sys = OrderedSystem::new(&d).unwrap();
        let there = sys.vershik(&x).unwrap();
        prop_assert_eq!(sys.vershik_inverse(&there).unwrap(), canonicalize(&d, &x).unwrap());
    }

    #[test]
    fn partner_is_an_involution(x in path_on(3)) {
        let pair = catalog::ternary_pair();
        if let FibreClassification::Pair { partner, .. } = pair.classify_fibre(&x).unwrap() {
            prop_assert_ne!(&partner, &canonicalize(&pair, &x).unwrap());
            prop_assert_eq!(pair.partner(&partner).unwrap(), canonicalize(&pair, &x).unwrap());
        }
    }

    #[test]
    fn diagram_json_round_trips(name in prop::sample::select(vec!["k:2", "k:5", "odometer:3", "fibonacci", "figure-two", "single-edge"])) {
        let d = catalog::diagram_named(name).unwrap();
        let text = io::diagram_to_json(&d);
        prop_assert_eq!(io::parse_diagram(&text).unwrap(), d);
    }

    #[test]
    fn first_copy_measure_shrinks(m in 1usize..20) {
        let pair = catalog::quaternary_pair();
        let here = kreport::measure_vanishing(&pair, &[], m).unwrap();
        let next = kreport::measure_vanishing(&pair, &[], m + 1).unwrap();
        prop_assert!(next.mu <= here.mu);
        prop_assert!(here.mu <= BigRational::new(BigInt::one(), BigInt::one() << m));
    }
}
