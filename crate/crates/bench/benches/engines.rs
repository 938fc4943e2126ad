use std::f64::consts::LN_10;
use std::hint::black_box;

use caqi_core::fock::full_chain_check;
use caqi_core::optimize::minimize_sensitivity;
use caqi_core::{closed_form, evaluate, Engine, OptimizeMode, OptimizerSettings, ParamPoint, Scheme, SchemeConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn point() -> ParamPoint {
    ParamPoint::new(4e14, LN_10 / 2.0, 0.3, 5.0, 0.6).unwrap()
}

fn bench_closed_form(c: &mut Criterion) {
    let p = point();
    c.bench_function("closed_form_sensitivity", |b| {
        b.iter(|| closed_form::sensitivity(black_box(&p)))
    });
}

fn bench_evaluate(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    for (name, engine) in [
        ("closed", Engine::ClosedForm),
        ("linear", Engine::GaussianLinearized),
        ("exact", Engine::GaussianExact),
    ] {
        let config = SchemeConfig::new(Scheme::Custom, point()).with_engine(engine);
        group.bench_with_input(BenchmarkId::from_parameter(name), &config, |b, cfg| {
            b.iter(|| evaluate(cfg))
        });
    }
    group.finish();
}

fn bench_optimizer(c: &mut Criterion) {
    let settings = OptimizerSettings::default();
    let mut group = c.benchmark_group("optimize");
    for (name, mode) in [
        ("free", OptimizeMode::Free),
        ("constrained", OptimizeMode::ConstrainedPhotonNumber),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| minimize_sensitivity(0.9, 0.48, 1.2e15, mode, &settings))
        });
    }
    group.finish();
}

fn bench_fock_chain(c: &mut Criterion) {
    let p = ParamPoint::new(0.64, 0.3, 0.6, 1.5, 0.3).unwrap();
    let mut group = c.benchmark_group("fock_chain");
    group.sample_size(10);
    for cutoff in [8usize, 12, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(cutoff), &cutoff, |b, &k| {
            b.iter(|| full_chain_check(&p, k))
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_closed_form,
    bench_evaluate,
    bench_optimizer,
    bench_fock_chain
);
criterion_main!(benches);
