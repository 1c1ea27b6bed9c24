//! Shared fixtures for the benchmarks.

use intermap_core::MapSpec;

/// Maps benchmarked throughout, with a short label.
pub fn bench_maps() -> Vec<(&'static str, MapSpec)> {
    vec![
        ("circle_1.5", MapSpec::circle(1.5).expect("valid")),
        ("circle_2", MapSpec::circle(2.0).expect("valid")),
        ("circle_3", MapSpec::circle(3.0).expect("valid")),
        ("hemmer", MapSpec::hemmer()),
        ("interval_0.7_2", MapSpec::interval(0.7, 2.0).expect("valid")),
    ]
}

/// Deterministic, well-spread starting points in (-1, 1).
pub fn start_points(count: usize) -> Vec<f64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    (1..=count).map(|i| 2.0 * (i as f64 * GOLDEN).fract() - 1.0).collect()
}
