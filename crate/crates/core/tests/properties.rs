use grassmann_cosine::grassmann::{gram_volume, projected_volume_ratio};
use grassmann_cosine::harmonics::{admissible_weights, character_value, range_predicate, weyl_dimension};
use grassmann_cosine::quadrature::integrate;
use grassmann_cosine::transforms::random_test_function;
use grassmann_cosine::valuations::{klain_section, volume_in, ProbeShape};
use grassmann_cosine::zelevinsky::{Multisegment, Segment};
use grassmann_cosine::{
    act, complement, cos_angle, haar_rotation, haar_subspace, principal_angles, projected_volume, sin_angle,
    GrassmannFunction, Polytope, QuadratureSpec, SeededSampler, TransformOp, Valuation,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// `(n, dim E, dim F)` with both dimensions in `0..=n`.
fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (2usize..=6).prop_flat_map(|n| (Just(n), 0..=n, 0..=n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn angle_symmetries((n, i, j) in dims(), seed in any::<u64>()) {
        let mut rng = SeededSampler::new(seed).stream(0);
        let e = haar_subspace(n, i, &mut rng).unwrap();
        let f = haar_subspace(n, j, &mut rng).unwrap();
        let c = cos_angle(&e, &f).unwrap();
        let s = sin_angle(&e, &f).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&c));
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&s));
        prop_assert!((c - cos_angle(&f, &e).unwrap()).abs() < 1e-9);
        prop_assert!((c - cos_angle(&complement(&e), &complement(&f)).unwrap()).abs() < 1e-9);
        prop_assert!((s - sin_angle(&f, &e).unwrap()).abs() < 1e-9);
        prop_assert!((s - sin_angle(&complement(&e), &complement(&f)).unwrap()).abs() < 1e-9);
        let g = haar_rotation(n, &mut rng).unwrap();
        let moved = cos_angle(&act(&g, &e).unwrap(), &act(&g, &f).unwrap()).unwrap();
        prop_assert!((c - moved).abs() < 1e-9);
    }

    #[test]
    fn volume_ratio_matches_cosine((n, i, j) in dims(), seed in any::<u64>()) {
        prop_assume!(i <= j && i >= 1);
        let mut rng = SeededSampler::new(seed).stream(1);
        let e = haar_subspace(n, i, &mut rng).unwrap();
        let f = haar_subspace(n, j, &mut rng).unwrap();
        let coeffs = DMatrix::from_fn(i, i, |_, _| rng.gen_range(-1.0..1.0));
        let edges = e.frame() * coeffs;
        prop_assume!(gram_volume(&edges) > 1e-3);
        let ratio = projected_volume_ratio(&edges, &f);
        prop_assert!((ratio - cos_angle(&e, &f).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn principal_angles_are_sorted_in_range((n, i, j) in dims(), seed in any::<u64>()) {
        let mut rng = SeededSampler::new(seed).stream(2);
        let e = haar_subspace(n, i, &mut rng).unwrap();
        let f = haar_subspace(n, j, &mut rng).unwrap();
        let a = principal_angles(&e, &f).unwrap().angles;
        prop_assert_eq!(a.len(), i.min(j));
        prop_assert!(a.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        prop_assert!(a.iter().all(|x| (-1e-12..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(x)));
    }

    #[test]
    fn range_predicate_symmetries(n in 2usize..=8, cap in 0i64..=6) {
        for i in 1..n {
            for j in 1..n {
                for w in admissible_weights(n, i, cap).unwrap() {
                    let p = range_predicate(n, i, j, &w);
                    prop_assert_eq!(p, range_predicate(n, j, i, &w));
                    prop_assert_eq!(p, range_predicate(n, n - i, n - j, &w));
                }
            }
        }
    }

    #[test]
    fn characters_are_bounded_by_dimension(n in 2usize..=6, cap in 0i64..=4, seed in any::<u64>()) {
        let mut rng = SeededSampler::new(seed).stream(3);
        let g = haar_rotation(n, &mut rng).unwrap();
        for k in 1..n {
            for w in admissible_weights(n, k, cap).unwrap() {
                let d = weyl_dimension(&w).unwrap() as f64;
                prop_assert!(d >= 1.0);
                if let Ok(chi) = character_value(&w, &g) {
                    prop_assert!(chi.abs() <= d * (1.0 + 1e-9), "{} {} {}", w, chi, d);
                }
            }
        }
    }

    #[test]
    fn transforms_are_linear_with_shared_streams(seed in any::<u64>(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let s = SeededSampler::new(seed);
        let op = TransformOp::cosine(4, 2, 1).unwrap();
        let f = random_test_function(4, 2, &mut s.stream(0));
        let h = random_test_function(4, 2, &mut s.stream(1));
        let e = haar_subspace(4, 1, &mut s.stream(2)).unwrap();
        let q = QuadratureSpec::new(500, seed);
        let combo = f.linear_combination(alpha, &h, beta).unwrap();
        let lhs = op.apply(&combo, &e, &q).unwrap().value;
        let rhs = alpha * op.apply(&f, &e, &q).unwrap().value + beta * op.apply(&h, &e, &q).unwrap().value;
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn radon_of_constant_is_exact(n in 3usize..=6, seed in any::<u64>(), c in -5.0f64..5.0) {
        let i = 2.min(n - 1);
        let op = TransformOp::radon(n, i, 1).unwrap();
        let e = haar_subspace(n, 1, &mut SeededSampler::new(seed).stream(0)).unwrap();
        let v = op.apply(&GrassmannFunction::constant(n, i, c), &e, &QuadratureSpec::new(200, seed)).unwrap();
        prop_assert!((v.value - c).abs() < 1e-12 * (1.0 + c.abs()));
        prop_assert!(v.stderr < 1e-12);
    }

    #[test]
    fn projected_volumes_are_even_and_translation_invariant(n in 2usize..=5, seed in any::<u64>()) {
        let mut rng = SeededSampler::new(seed).stream(4);
        let k = Polytope::random(n, n + 3, &mut rng);
        let fdim = rng.gen_range(0..n);
        let f = haar_subspace(n, fdim, &mut rng).unwrap();
        let base = projected_volume(&k, &f).unwrap();
        prop_assert!(base >= 0.0);
        prop_assert!((projected_volume(&k.reflected(), &f).unwrap() - base).abs() < 1e-9 * (1.0 + base));
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        prop_assert!((projected_volume(&k.translated(&x), &f).unwrap() - base).abs() < 1e-9 * (1.0 + base));
        let mut shuffled = k.vertices.clone();
        shuffled.shuffle(&mut rng);
        let again = projected_volume(&Polytope::new(n, shuffled).unwrap(), &f).unwrap();
        prop_assert!((again - base).abs() < 1e-9 * (1.0 + base));
    }

    #[test]
    fn hull_volume_is_rotation_invariant(n in 2usize..=5, seed in any::<u64>()) {
        let mut rng = SeededSampler::new(seed).stream(5);
        let k = Polytope::random(n, n + 4, &mut rng);
        let g = haar_rotation(n, &mut rng).unwrap();
        let v = k.volume();
        prop_assert!((k.mapped(g.matrix()).volume() - v).abs() < 1e-9 * (1.0 + v));
    }

    #[test]
    fn klain_section_does_not_depend_on_probe(n in 2usize..=5, seed in any::<u64>()) {
        let mut rng = SeededSampler::new(seed).stream(6);
        let i = rng.gen_range(1..=n);
        let target = haar_subspace(n, i, &mut rng).unwrap();
        let e = haar_subspace(n, i, &mut rng).unwrap();
        let phi = Valuation::projection_onto(&target);
        let cube = klain_section(&phi, &e, &Polytope::probe_in(&e, ProbeShape::Cube)).unwrap();
        let simplex = klain_section(&phi, &e, &Polytope::probe_in(&e, ProbeShape::Simplex)).unwrap();
        prop_assert!((cube - simplex).abs() < 1e-9);
        prop_assert!((cube - cos_angle(&e, &target).unwrap()).abs() < 1e-9);
        prop_assert!((volume_in(&Polytope::probe_in(&e, ProbeShape::Cube), &e) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn segment_duality_and_conservation(a in -8i64..=8, la in 0i64..=4, b in -8i64..=8, lb in 0i64..=4) {
        let s = Segment::new(a, a + 2 * la).unwrap();
        let t = Segment::new(b, b + 2 * lb).unwrap();
        prop_assert_eq!(s.dual().dual(), s);
        if let Ok(true) = s.linked(&t) {
            let (u, c) = s.union_cap(&t).unwrap();
            prop_assert_eq!(s.len() + t.len(), u.len() + c.map_or(0, |c| c.len()));
            prop_assert_eq!(s.precedes(&t).unwrap(), t.dual().precedes(&s.dual()).unwrap());
        }
    }

    #[test]
    fn multisegment_equality_ignores_order(raw in prop::collection::vec((-6i64..=6, 0i64..=3), 0..6), seed in any::<u64>()) {
        let segs: Vec<Segment> = raw.iter().map(|&(a, l)| Segment::new(a, a + 2 * l).unwrap()).collect();
        let mut shuffled = segs.clone();
        shuffled.shuffle(&mut SeededSampler::new(seed).stream(7));
        let m = Multisegment::new(segs);
        prop_assert_eq!(&m, &Multisegment::new(shuffled));
        prop_assert_eq!(m.dual().dual(), m);
    }
}

#[test]
fn stderr_shrinks_by_root_two_per_doubling() {
    let mut prev: Option<f64> = None;
    for k in 0..6 {
        let q = QuadratureSpec::new(20_000 << k, 11);
        let est = integrate(&q, |rng, _| {
            let e = haar_subspace(4, 2, rng).unwrap();
            cos_angle(&e, &grassmann_cosine::Subspace::coordinate(4, 2)).unwrap()
        })
        .unwrap();
        if let Some(p) = prev {
            let step = est.stderr / p;
            assert!((step * 2f64.sqrt() - 1.0).abs() < 0.2, "doubling {k}: ratio {step}");
        }
        prev = Some(est.stderr);
    }
}

#[test]
fn angle_statistics_are_haar_invariant() {
    let g = haar_rotation(5, &mut SeededSampler::new(12).stream(0)).unwrap();
    for (i, j) in [(1, 2), (2, 2), (2, 3)] {
        let stat = |moved: bool, seed: u64| {
            integrate(&QuadratureSpec::new(40_000, seed), |rng, _| {
                let mut e = haar_subspace(5, i, rng).unwrap();
                let mut f = haar_subspace(5, j, rng).unwrap();
                if moved {
                    e = act(&g, &e).unwrap();
                    f = act(&g, &f).unwrap();
                }
                principal_angles(&e, &f).unwrap().angles[0].cos()
            })
            .unwrap()
        };
        let a = stat(false, 13);
        let b = stat(true, 14);
        assert!((a.value - b.value).abs() < 3.0 * a.combined_stderr(&b), "{a:?} {b:?}");
    }
}
