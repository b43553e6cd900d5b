//! Sequential against rayon-parallel execution of the embarrassingly
//! parallel workloads: Lipschitz sampling, derivative probes and batches of
//! independent trajectories.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stemdde::verification::{check_s, estimate_lb, LbFunctional, LbOptions, SCheckOptions};
use stemdde::{Exec, HistorySegment, InnerSolver, IntegrateOptions, Model, RateSet};

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn lb_sampling(c: &mut Criterion) {
    let rates = RateSet::demo();
    let inner = InnerSolver::default();
    let opts = LbOptions {
        n: 100,
        ..Default::default()
    };
    let mut group = c.benchmark_group("estimate_lb_tau_n100");
    group.sample_size(10);
    for (name, exec) in EXECS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(estimate_lb(LbFunctional::Tau, &rates, &inner, &opts, exec)))
        });
    }
    group.finish();
}

fn derivative_probes(c: &mut Criterion) {
    let rates = RateSet::demo();
    let inner = InnerSolver::default();
    let opts = SCheckOptions {
        n_probes: 20,
        ..Default::default()
    };
    let mut group = c.benchmark_group("check_s_20_probes");
    group.sample_size(10);
    for (name, exec) in EXECS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(check_s(&rates, &inner, &opts, exec)))
        });
    }
    group.finish();
}

fn trajectory_batch(c: &mut Criterion) {
    let model = Model::new(RateSet::demo());
    let h = model.horizon();
    let starts: Vec<HistorySegment> = (0..8)
        .map(|i| {
            let raw = HistorySegment::constant(&[0.1 + 0.1 * i as f64, 0.2 + 0.15 * i as f64], h).unwrap();
            model.make_compatible(&raw).unwrap()
        })
        .collect();
    let opts = IntegrateOptions::default();
    let mut group = c.benchmark_group("integrate_many_8x5");
    group.sample_size(10);
    for (name, exec) in EXECS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(model.integrate_many(&starts, 5.0, &opts, exec)))
        });
    }
    group.finish();
}

criterion_group!(benches, lb_sampling, derivative_probes, trajectory_batch);
criterion_main!(benches);
