//! Parallel versus sequential execution of the hot paths.
//!
//! Build with `--no-default-features` to compare against a binary without
//! rayon; the `parallel` flag of each config selects the path at run time.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use locent::le_engine::{le_constructive, le_refine, le_sampled, EngineConfig, OrderRule, RefineConfig, SampleStrategy};
use locent::qstate::PureState;
use locent::spin_models::{ground_state, ising_spec, SolverConfig};

fn ising(n: usize, lambda: f64) -> PureState {
    let spec = ising_spec(n, lambda, 1e-3, false).unwrap();
    ground_state(&spec, &SolverConfig::default()).unwrap().state
}

fn modes() -> [(&'static str, bool); 2] {
    [("parallel", true), ("sequential", false)]
}

fn engine_config(parallel: bool) -> EngineConfig {
    if parallel { EngineConfig::default() } else { EngineConfig::sequential() }
}

fn ground_states(c: &mut Criterion) {
    let mut g = c.benchmark_group("ground_state");
    g.sample_size(10);
    let spec = ising_spec(14, 1.0, 0.0, false).unwrap();
    for (name, parallel) in modes() {
        let cfg = SolverConfig { parallel, ..SolverConfig::default() };
        g.bench_with_input(BenchmarkId::new(name, 14), &cfg, |b, cfg| b.iter(|| ground_state(black_box(&spec), cfg)));
    }
    g.finish();
}

fn constructive(c: &mut Criterion) {
    let mut g = c.benchmark_group("le_constructive");
    g.sample_size(10);
    for n in [10, 14] {
        let s = ising(n, 1.0);
        let (i, j) = (n / 2 - 2, n / 2 + 2);
        for (name, parallel) in modes() {
            let cfg = engine_config(parallel);
            g.bench_with_input(BenchmarkId::new(name, n), &cfg, |b, cfg| {
                b.iter(|| le_constructive(black_box(&s), i, j, &OrderRule::default(), cfg))
            });
        }
    }
    g.finish();
}

fn sampled(c: &mut Criterion) {
    let mut g = c.benchmark_group("le_sampled");
    g.sample_size(10);
    let s = ising(14, 1.0);
    for (name, parallel) in modes() {
        let cfg = engine_config(parallel);
        g.bench_with_input(BenchmarkId::new(name, 14), &cfg, |b, cfg| {
            b.iter(|| le_sampled(black_box(&s), 5, 9, &SampleStrategy::Constructive, 200, 0, cfg))
        });
    }
    g.finish();
}

fn refine(c: &mut Criterion) {
    let mut g = c.benchmark_group("le_refine");
    g.sample_size(10);
    let s = ising(8, 1.0);
    for (name, parallel) in modes() {
        let cfg = engine_config(parallel);
        g.bench_with_input(BenchmarkId::new(name, 8), &cfg, |b, cfg| {
            b.iter(|| le_refine(black_box(&s), 3, 4, None, &RefineConfig::default(), cfg))
        });
    }
    g.finish();
}

criterion_group!(benches, ground_states, constructive, sampled, refine);
criterion_main!(benches);
