use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tdsig::harness::run_ceremony;
use tdsig::sweep::{completeness_batch, forgery_batch, secrecy_batch, Execution};
use tdsig::vectors::reference_config;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn reference(c: &mut Criterion) {
    let config = reference_config();
    c.bench_function("reference_ceremony", |b| {
        b.iter(|| run_ceremony(black_box(&config)).unwrap())
    });
}

fn completeness(c: &mut Criterion) {
    let mut group = c.benchmark_group("completeness_32");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| completeness_batch(exec, 1, 32))
        });
    }
    group.finish();
}

fn forgery(c: &mut Criterion) {
    let mut group = c.benchmark_group("forgery_64");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| forgery_batch(exec, 2, 64, 10_007, 65_521))
        });
    }
    group.finish();
}

fn secrecy(c: &mut Criterion) {
    let mut group = c.benchmark_group("secrecy_q_le_31");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| secrecy_batch(exec, 3, 2, 31, 4))
        });
    }
    group.finish();
}

criterion_group!(benches, reference, completeness, forgery, secrecy);
criterion_main!(benches);
