use intermap_core::mc::{par_batches, split};
use intermap_core::stats::{ks_distance, ks_two_sample, EmpiricalDist, Pmf};
use intermap_core::{build_partition, Branch, Error, MapSpec};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::Rng;

fn circle() -> impl Strategy<Value = MapSpec> {
    (1.05f64..4.0).prop_map(|g| MapSpec::circle(g).unwrap())
}

fn interval() -> impl Strategy<Value = MapSpec> {
    (0.1f64..0.95, 1.05f64..4.0).prop_map(|(k, g)| MapSpec::interval(k, g).unwrap())
}

fn any_map() -> impl Strategy<Value = MapSpec> {
    prop_oneof![circle(), interval()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn circle_map_is_odd(spec in circle(), x in 1e-9f64..1.0) {
        let map = spec.build();
        prop_assert_eq!(map.eval(-x).unwrap(), -map.eval(x).unwrap());
    }

    #[test]
    fn interval_map_is_even(spec in interval(), x in 1e-9f64..1.0) {
        let map = spec.build();
        prop_assert_eq!(map.eval(-x).unwrap(), map.eval(x).unwrap());
    }

    #[test]
    fn maps_stay_in_the_unit_interval(spec in any_map(), x in -1.0f64..=1.0) {
        let y = spec.build().eval(x).unwrap();
        prop_assert!((-1.0..=1.0).contains(&y));
    }

    #[test]
    fn branch_inverse_round_trips(spec in any_map(), y in -0.999f64..0.999, left in any::<bool>()) {
        let map = spec.build();
        let branch = if left { Branch::Left } else { Branch::Right };
        let x = map.invert(branch, y).unwrap();
        prop_assert!(x.abs() <= 1.0);
        prop_assert_eq!(x <= 0.0, left);
        prop_assert!((map.eval(x).unwrap() - y).abs() < 1e-9, "x = {x}, T(x) = {}", map.eval(x).unwrap());
    }

    #[test]
    fn circle_map_expands(spec in circle(), x in -0.999f64..0.999) {
        prop_assume!(x.abs() > 1e-6);
        let d = spec.build().deriv(x, 1).unwrap();
        prop_assert!(d >= 1.0 - 1e-12, "DT({x}) = {d}");
    }

    #[test]
    fn partition_is_monotone(spec in any_map(), depth in 10usize..2_000) {
        let t = match build_partition(&spec, depth) {
            Ok(t) => t,
            Err(Error::Depth { requested, max_achievable }) => {
                prop_assert!(max_achievable < requested);
                build_partition(&spec, max_achievable).unwrap()
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let depth = t.depth();
        let mut sum = 0.0;
        for n in 1..=depth {
            prop_assert!(t.a_plus(n) > t.a_plus(n - 1));
            prop_assert!(t.a_minus(n) < t.a_minus(n - 1));
            prop_assert!(t.gap(n) < t.gap(n - 1) && t.gap(n) > 0.0);
            prop_assert!(t.l(n) > 0.0);
            sum += t.l(n);
        }
        prop_assert!((sum - (t.a_plus(depth) - t.a_plus(0))).abs() < 1e-12);
    }

    #[test]
    fn split_covers_total(total in 0usize..100_000, batches in 1usize..200) {
        let parts = split(total, batches);
        prop_assert_eq!(parts.iter().sum::<usize>(), total);
        let (lo, hi) = (parts.iter().min().unwrap(), parts.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
    }

    #[test]
    fn empirical_cdf_is_a_distribution(xs in prop::collection::vec(-1e3f64..1e3, 1..200), probe in -2e3f64..2e3) {
        let d = EmpiricalDist::new(xs.clone());
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(d.cdf(max), 1.0);
        prop_assert!(d.cdf_left(probe) <= d.cdf(probe));
        prop_assert!(d.cdf(probe) <= d.cdf(probe + 1.0));
        let q = d.quantile(0.5);
        prop_assert!(d.cdf(q) >= 0.5);
    }

    #[test]
    fn ks_distances_are_bounded(xs in prop::collection::vec(-3f64..3.0, 1..200), ys in prop::collection::vec(-3f64..3.0, 1..200)) {
        let (a, b) = (EmpiricalDist::new(xs), EmpiricalDist::new(ys));
        let k = ks_distance(&a, |x| ((x + 3.0) / 6.0).clamp(0.0, 1.0));
        prop_assert!((0.0..=1.0).contains(&k));
        prop_assert_eq!(ks_two_sample(&a, &a), 0.0);
        prop_assert!((ks_two_sample(&a, &b) - ks_two_sample(&b, &a)).abs() < 1e-15);
    }

    #[test]
    fn pmf_normalizes(visits in prop::collection::vec(0usize..20, 1..300)) {
        let p = Pmf::from_counts(&visits);
        let k_max = *visits.iter().max().unwrap();
        let total: f64 = (0..=k_max).map(|k| p.prob(k)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert_eq!(p.prob(k_max + 1), 0.0);
        let zeros = visits.iter().filter(|&&v| v == 0).count();
        prop_assert!((p.prob(0) - zeros as f64 / visits.len() as f64).abs() < 1e-15);
        prop_assert!(p.total_variation(|k| p.prob(k), k_max) < 1e-12);
    }
}

#[test]
fn batch_results_do_not_depend_on_thread_count() {
    let draw = || par_batches(11, 10_007, 100, |rng, count, _| (0..count).map(|_| rng.random::<f64>()).sum::<f64>());
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(draw);
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(draw);
    assert_eq!(one, four);
}

#[test]
fn partition_points_are_preimages() {
    for spec in [MapSpec::circle(2.0).unwrap(), MapSpec::hemmer(), MapSpec::interval(0.7, 2.5).unwrap()] {
        let t = build_partition(&spec, 200).unwrap();
        let map = spec.build();
        for n in 1..200 {
            let image = map.eval(t.a_plus(n)).unwrap();
            assert!(
                (image - t.a_plus(n - 1)).abs() < 1e-12 || (image - t.a_minus(n - 1)).abs() < 1e-12,
                "{}: T(a_{n}) = {image}",
                spec.label()
            );
        }
    }
}
