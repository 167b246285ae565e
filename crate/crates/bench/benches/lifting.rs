use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use liftfg::{run_cp, run_lifg, CpOptions};
use liftfg_bench::{incomplete, truth};

fn colour_passing(c: &mut Criterion) {
    let opts = CpOptions::default();
    let mut group = c.benchmark_group("run_cp");
    for d in [16, 64, 256] {
        let g = truth(d, 3);
        group.bench_with_input(BenchmarkId::from_parameter(d), &g, |b, g| {
            b.iter(|| run_cp(black_box(g), &opts))
        });
    }
    group.finish();
}

fn lifg(c: &mut Criterion) {
    let opts = CpOptions::default();
    let mut group = c.benchmark_group("run_lifg");
    for d in [16, 64, 256] {
        let g = incomplete(d, 3);
        group.bench_with_input(BenchmarkId::from_parameter(d), &g, |b, g| {
            b.iter(|| run_lifg(black_box(g), 0.0, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, colour_passing, lifg);
criterion_main!(benches);
