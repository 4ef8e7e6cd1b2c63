use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tropphylo::rational::{frac, int};
use tropphylo::tropcore::tropical_vector;
use tropphylo::*;

fn tree(n: usize) -> WeightedTree {
    random_tree(n, 17, &int(1), &int(10)).unwrap()
}

fn dissimilarity(c: &mut Criterion) {
    let mut group = c.benchmark_group("dissim");
    for n in [6, 10, 14] {
        let t = tree(n);
        let d = pairwise_map(&t);
        group.bench_with_input(BenchmarkId::new("four_point_check", n), &d, |b, d| b.iter(|| four_point_check(black_box(d))));
        group.bench_with_input(BenchmarkId::new("reconstruct_tree", n), &d, |b, d| b.iter(|| reconstruct_tree(black_box(d))));
        group.bench_with_input(BenchmarkId::new("phi_r/4", n), &d, |b, d| b.iter(|| phi_r(black_box(d), 4)));
        group.bench_with_input(BenchmarkId::new("steiner_r_map/4", n), &t, |b, t| b.iter(|| steiner_r_map(black_box(t), 4)));
    }
    group.finish();
}

fn dressian(c: &mut Criterion) {
    let mut group = c.benchmark_group("dressian");
    for n in [6, 8] {
        let p = tropical_vector(phi_r(&pairwise_map(&tree(n)), 3).unwrap().as_subset_vector());
        group.bench_with_input(BenchmarkId::new("three_term_k3", n), &p, |b, p| {
            b.iter(|| dressian_report(black_box(p), RelationFamily::ThreeTerm, Convention::Max))
        });
        group.bench_with_input(BenchmarkId::new("quadratic_k3", n), &p, |b, p| {
            b.iter(|| dressian_report(black_box(p), RelationFamily::Quadratic, Convention::Max))
        });
    }
    group.finish();
}

fn minors(c: &mut Criterion) {
    let rows: Vec<Vec<Rational>> = (0..3)
        .map(|i| (0..7).map(|j| frac((i * 7 + j * j + 1) % 11 - 5, j % 3 + 1)).collect())
        .collect();
    let m = RationalMatrix::new(rows).unwrap();
    c.bench_function("pluecker_minors/3x7", |b| b.iter(|| pluecker_minors(black_box(&m))));
}

fn linear_space(c: &mut Criterion) {
    let t = tree(8);
    let subtrees = leaf_free_subtrees(&t);
    let largest = subtrees.last().unwrap().clone();
    c.bench_function("leaf_free_subtrees/8", |b| b.iter(|| leaf_free_subtrees(black_box(&t))));
    c.bench_function("facet_scan/8/r3", |b| {
        b.iter(|| facet_scan(black_box(&t), &largest, 3, Interpretation::Pairwise))
    });
}

fn harness(c: &mut Criterion) {
    let cfg = VerifyConfig { trials: 8, ..VerifyConfig::default() };
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("default_config/8_trials", |b| b.iter(|| run_verify(black_box(&cfg))));
    group.finish();
}

criterion_group!(benches, dissimilarity, dressian, minors, linear_space, harness);
criterion_main!(benches);
