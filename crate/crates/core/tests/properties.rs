use ostat_core::geometry::{crofton_constant, ConvexBody};
use ostat_core::limits::{intensity_measure, limit_tail, LimitLaw};
use ostat_core::linalg::dist;
use ostat_core::models::{run_model, run_on_sample, sample_model, ModelSpec, RunParams};
use ostat_core::orderstats::{enumerate_below, m_smallest, EnumerationStrategy, Metric};
use ostat_core::sampling::{sample_isotropic_flats, uniform_direction, SeededStream};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_pruning_matches_brute_force(
        pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..120),
        thr in 0.01f64..0.3,
        extra in 1.0f64..3.0,
    ) {
        let pts: Vec<[f64; 2]> = pts.into_iter().map(|(a, b)| [a, b]).collect();
        let f = Metric(|t: &[&[f64; 2]]| Some(dist(t[0], t[1])));
        let b = enumerate_below(&pts, 2, &f, thr, EnumerationStrategy::BruteForce).unwrap();
        let g = enumerate_below(&pts, 2, &f, thr, EnumerationStrategy::GridPrune { cell: thr * extra }).unwrap();
        prop_assert_eq!(b, g);
    }

    #[test]
    fn triple_diameter_grid_matches_brute_force(
        pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 0..40),
        thr in 0.05f64..0.5,
    ) {
        let pts: Vec<[f64; 3]> = pts.into_iter().map(|(a, b, c)| [a, b, c]).collect();
        let f = Metric(|t: &[&[f64; 3]]| {
            Some(dist(t[0], t[1]).max(dist(t[0], t[2])).max(dist(t[1], t[2])))
        });
        let b = enumerate_below(&pts, 3, &f, thr, EnumerationStrategy::BruteForce).unwrap();
        let g = enumerate_below(&pts, 3, &f, thr, EnumerationStrategy::GridPrune { cell: thr }).unwrap();
        prop_assert_eq!(b, g);
    }

    #[test]
    fn raising_the_threshold_extends_the_prefix(
        pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..80),
        lo in 0.01f64..0.2,
        more in 0.0f64..0.3,
    ) {
        let pts: Vec<[f64; 2]> = pts.into_iter().map(|(a, b)| [a, b]).collect();
        let f = Metric(|t: &[&[f64; 2]]| Some(dist(t[0], t[1])));
        let small = enumerate_below(&pts, 2, &f, lo, EnumerationStrategy::BruteForce).unwrap();
        let big = enumerate_below(&pts, 2, &f, lo + more, EnumerationStrategy::BruteForce).unwrap();
        prop_assert!(big.len() >= small.len());
        prop_assert_eq!(&big[..small.len()], &small[..]);
    }

    #[test]
    fn m_smallest_is_a_sorted_prefix(v in prop::collection::vec(-1e3f64..1e3, 0..60), m in 0usize..70) {
        let mut all = v.clone();
        all.sort_by(f64::total_cmp);
        let got = m_smallest(&v, m);
        prop_assert_eq!(&all[..m.min(v.len())], &got[..]);
    }

    #[test]
    fn tails_decrease_in_x_and_increase_in_m(
        beta in 0.1f64..5.0, tau in 0.2f64..4.0, x in 0.0f64..3.0, dx in 0.0f64..1.0, m in 1usize..6,
    ) {
        let law = LimitLaw::new(1.0, beta, tau).unwrap();
        let a = limit_tail(m, x, &law);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(limit_tail(m, x + dx, &law) <= a + 1e-15);
        prop_assert!(limit_tail(m + 1, x, &law) >= a - 1e-15);
    }

    #[test]
    fn intensity_is_additive(beta in 0.1f64..5.0, tau in 0.2f64..4.0, a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        let law = LimitLaw::new(1.0, beta, tau).unwrap();
        let (a, b, c) = (a, a + b, a + b + c);
        let whole = intensity_measure(a, c, &law).unwrap();
        let parts = intensity_measure(a, b, &law).unwrap() + intensity_measure(b, c, &law).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.max(1.0));
    }

    #[test]
    fn crofton_constant_is_symmetric_in_roles(d in 1usize..8, k in 0usize..8) {
        prop_assume!(k <= d);
        prop_assert!((crofton_constant(d, k, k).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn line_hit_counts_follow_crofton() {
    // lines hitting the unit ball in R^3: mean t ς_{3,0,1} V_2(B^3) = t π
    let w = ConvexBody::unit_ball(3).unwrap();
    let t = 5.0;
    let reps = 2000;
    let mut counts = Vec::with_capacity(reps);
    for i in 0..reps {
        let mut rng = SeededStream::new(21, i as u64).rng();
        counts.push(sample_isotropic_flats(t, 1, &w, &mut rng).unwrap().flats.len() as f64);
    }
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let target = t * crofton_constant(3, 0, 1).unwrap() * w.intrinsic_volume(2);
    assert!((target - t * std::f64::consts::PI).abs() < 1e-12);
    assert!((mean - target).abs() < 3.0 * (target / reps as f64).sqrt(), "{mean} vs {target}");
}

#[test]
fn directions_are_isotropic() {
    // chi-square over the 8 octants of S^2
    let mut rng = SeededStream::new(5, 0).rng();
    let n = 16000;
    let mut bins = [0usize; 8];
    for _ in 0..n {
        let u = uniform_direction(3, &mut rng);
        let b = (u[0] > 0.0) as usize | ((u[1] > 0.0) as usize) << 1 | ((u[2] > 0.0) as usize) << 2;
        bins[b] += 1;
    }
    let e = n as f64 / 8.0;
    let chi2: f64 = bins.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    // 99.9% point of chi-square with 7 degrees of freedom
    assert!(chi2 < 24.32, "{chi2}");
}

#[test]
fn default_strategy_matches_brute_force_on_every_model() {
    let specs = [
        ModelSpec::gilbert(ConvexBody::unit_cube(2).unwrap()),
        ModelSpec::SpherePolytope { d: 3 },
        ModelSpec::ProximityFlats { k: 1, window: ConvexBody::unit_ball(3).unwrap() },
        ModelSpec::IntersectingFlats { d: 3, k: 2, ell: 2, j: 1 },
        ModelSpec::PointSimplices { window: ConvexBody::unit_cube(2).unwrap() },
        ModelSpec::HyperplaneSimplices { window: ConvexBody::unit_cube(2).unwrap() },
    ];
    for spec in &specs {
        for i in 0..5u64 {
            let mut rng = SeededStream::new(77, i).rng();
            let sample = sample_model(spec, 12.0, &mut rng).unwrap();
            let fast = run_on_sample(spec, &RunParams::new(12.0, 2.0, 3), sample.clone()).unwrap();
            let slow = RunParams { strategy: Some(EnumerationStrategy::BruteForce), ..RunParams::new(12.0, 2.0, 3) };
            let slow = run_on_sample(spec, &slow, sample).unwrap();
            assert_eq!(fast.values, slow.values, "{}", spec.name());
        }
    }
}

#[test]
fn runs_are_reproducible() {
    let spec = ModelSpec::gilbert(ConvexBody::unit_cube(2).unwrap());
    let p = RunParams::new(50.0, 3.0, 4);
    let a = run_model(&spec, &p, SeededStream::new(9, 3)).unwrap();
    let b = run_model(&spec, &p, SeededStream::new(9, 3)).unwrap();
    let c = run_model(&spec, &p, SeededStream::new(9, 4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.sample, c.sample);
}
