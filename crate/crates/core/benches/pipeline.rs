//! Sequential vs parallel backends on the hot loops.
//!
//! Build with `--no-default-features` to measure the fallback alone; the
//! `parallel` rows then run on the calling thread as well.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
use symfisher::estimator::{estimate_fim, second_moment};
use symfisher::linalg::williamson;
use symfisher::models::{BenchmarkFunction, BenchmarkMap};
use symfisher::{EstimatorConfig, Execution, InputModel, SymMatrix};

const BACKENDS: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn sampling(c: &mut Criterion) {
    let model = InputModel::standard_normals(15).unwrap();
    let mut group = c.benchmark_group("sample_15d_100k");
    for (name, exec) in BACKENDS {
        group.bench_function(name, |b| b.iter(|| black_box(model.sample(100_000, 1, exec))));
    }
    group.finish();
}

fn moments(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let scores = DMatrix::from_fn(200_000, 30, |_, _| rng.random_range(-2.0..2.0));
    let mut group = c.benchmark_group("second_moment_200k_x30");
    for (name, exec) in BACKENDS {
        group.bench_function(name, |b| b.iter(|| black_box(second_moment(&scores, exec))));
    }
    group.finish();
}

fn estimation(c: &mut Criterion) {
    let model = InputModel::standard_normals(15).unwrap();
    let map = BenchmarkMap::new(BenchmarkFunction::shipped()).unwrap();
    let mut group = c.benchmark_group("estimate_fim_benchmark");
    group.sample_size(10);
    for n in [2_000usize, 10_000] {
        for (name, exec) in BACKENDS {
            let cfg = EstimatorConfig::new(n, 7).with_execution(exec);
            group.bench_with_input(BenchmarkId::new(name, n), &cfg, |b, cfg| {
                b.iter(|| black_box(estimate_fim(&model, &map, cfg).unwrap()))
            });
        }
    }
    group.finish();
}

fn decomposition(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut group = c.benchmark_group("williamson");
    for dim in [10usize, 30] {
        let g = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        let f = SymMatrix::symmetrized(g.transpose() * g + DMatrix::identity(dim, dim));
        group.bench_with_input(BenchmarkId::from_parameter(dim), &f, |b, f| {
            b.iter(|| black_box(williamson(f).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, sampling, moments, estimation, decomposition);
criterion_main!(benches);
