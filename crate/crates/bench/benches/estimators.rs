use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use intermap_core::density::{histogram_density, ulam_density, Binning, UlamOperator};
use intermap_core::stats::{
    birkhoff_normalized_sums, estimate_correlation, neutral_point_stable_law, Normalization, ObservableKind,
    ObservableSpec, Sampling,
};
use intermap_core::MapSpec;

fn ulam(c: &mut Criterion) {
    let mut group = c.benchmark_group("ulam");
    group.sample_size(10);
    let hemmer = MapSpec::hemmer();
    for cells in [500usize, 2_000] {
        let edges = Binning::Uniform { bins: cells }.edges(None).unwrap();
        group.bench_with_input(BenchmarkId::new("assemble", cells), &edges, |b, edges| {
            b.iter(|| UlamOperator::new(&hemmer, edges.clone()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("stationary", cells), &cells, |b, &bins| {
            b.iter(|| ulam_density(&hemmer, &Binning::Uniform { bins }, None).unwrap())
        });
    }
    group.finish();
}

fn histogram(c: &mut Criterion) {
    let mut group = c.benchmark_group("histogram");
    group.sample_size(10);
    let hemmer = MapSpec::hemmer();
    let binning = Binning::Uniform { bins: 1_000 };
    group.bench_function("hemmer_1e6_steps", |b| {
        b.iter(|| histogram_density(&hemmer, &binning, None, black_box(1_000_000), &Sampling::default(), 1).unwrap())
    });
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    let circle = MapSpec::circle(1.5).unwrap();
    let phi = ObservableSpec::new(ObservableKind::HolderPower { nu: 1.0, center: 0.5 }).centered();
    group.bench_function("birkhoff_n1e3_x1e3", |b| {
        b.iter(|| {
            birkhoff_normalized_sums(&circle, &phi, 1_000, 1_000, Normalization::SqrtN, &Sampling::default(), 2).unwrap()
        })
    });
    let circle2 = MapSpec::circle(2.0).unwrap();
    group.bench_function("correlation_n100_x1e4", |b| {
        b.iter(|| estimate_correlation(&circle2, &phi, &phi, 100, 10_000, &Sampling::default(), 3).unwrap())
    });
    group.finish();
}

fn stable_law(c: &mut Criterion) {
    let law = neutral_point_stable_law(3.0, 1.0).unwrap();
    c.bench_function("stable_cdf", |b| b.iter(|| law.cdf(black_box(0.7)).unwrap()));
}

criterion_group!(benches, ulam, histogram, monte_carlo, stable_law);
criterion_main!(benches);
