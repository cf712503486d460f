use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use macroforge::engine::{ensemblerun, step, NoShock};
use macroforge::io::fixture;
use macroforge::model::init_model;

fn single_step(c: &mut Criterion) {
    let doc = fixture();
    let mut group = c.benchmark_group("step");
    group.sample_size(20);
    for (label, parallel) in [("sequential", false), ("sector_parallel", true)] {
        group.bench_function(BenchmarkId::new(label, 1000), |b| {
            b.iter_batched(
                || {
                    let mut m = init_model(&doc.parameters, &doc.initial_conditions, 4).unwrap();
                    m.set_sector_parallel(parallel);
                    m
                },
                |mut m| step(&mut m, &NoShock).unwrap(),
                criterion::BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn ensemble(c: &mut Criterion) {
    let doc = fixture();
    let model = init_model(&doc.parameters, &doc.initial_conditions, 8).unwrap();
    let mut group = c.benchmark_group("ensemble_8_runs");
    group.sample_size(10);
    for (label, parallel) in [("sequential", false), ("parallel", true)] {
        group.bench_function(label, |b| {
            b.iter(|| ensemblerun(&model, 8, 7, &NoShock, parallel).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, single_step, ensemble);
criterion_main!(benches);
