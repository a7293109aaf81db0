use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stekloff_core::ball::ball_spectrum_with;
use stekloff_core::blockop::penalty::DEFAULT_LAMBDAS;
use stekloff_core::blockop::tau::{fixed_point_eigensolve_with, tau_curves_with};
use stekloff_core::blockop::{make_model, verify_model, Blocks, Dims, Side, SpectralKnobs};
use stekloff_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ball(c: &mut Criterion) {
    let mut g = c.benchmark_group("ball_spectrum_n80");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| ball_spectrum_with(black_box(1.0), 80, exec).unwrap())
        });
    }
    g.finish();
}

fn schur_side(c: &mut Criterion) {
    let model = make_model(Dims::new(20, 20, 10), 0, 1.0, &SpectralKnobs::default()).unwrap();
    let blocks = Blocks::new(&model).unwrap();
    let r = 0.9 * blocks.w1_validity().min(1e3);
    let grid: Vec<f64> = (0..101).map(|i| -r + 2.0 * r * i as f64 / 100.0).collect();

    let mut g = c.benchmark_group("w1_side");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("tau_curves", name), &exec, |b, &e| {
            b.iter(|| tau_curves_with(&blocks, Side::W1, &grid, None, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("fixed_points", name), &exec, |b, &e| {
            b.iter(|| fixed_point_eigensolve_with(&blocks, Side::W1, (-r, 0.0), None, e).unwrap())
        });
    }
    g.finish();
}

fn verify(c: &mut Criterion) {
    let model = make_model(Dims::new(12, 12, 6), 1, 1.0, &SpectralKnobs::default()).unwrap();
    let mut g = c.benchmark_group("verify_model_30");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| verify_model(&model, &DEFAULT_LAMBDAS, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, ball, schur_side, verify);
criterion_main!(benches);
