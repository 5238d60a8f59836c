use std::hint::black_box;

use adaprox::{adapgnc_step, estimate_curvature, relaxed_step, run, SolverConfig};
use adaprox_bench::{curvature_pairs, lasso, logistic, monitored_trace, nmf, replay, step_state};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn step_rules(c: &mut Criterion) {
    let pairs = curvature_pairs(1024, 7);
    let mut g = c.benchmark_group("step_rule");
    g.bench_function("adapgnc", |b| {
        b.iter(|| {
            pairs
                .iter()
                .map(|&p| adapgnc_step(0.3, 2.0, p).unwrap())
                .sum::<f64>()
        })
    });
    g.bench_function("relaxed", |b| {
        b.iter(|| {
            pairs
                .iter()
                .map(|&p| relaxed_step(0.3, 2.0, p).unwrap())
                .sum::<f64>()
        })
    });
    g.finish();

    let mut g = c.benchmark_group("curvature_estimate");
    for dim in [10, 1_000, 100_000] {
        let state = step_state(dim, 3);
        g.bench_with_input(BenchmarkId::from_parameter(dim), &state, |b, s| {
            b.iter(|| estimate_curvature(black_box(s)).unwrap())
        });
    }
    g.finish();
}

fn full_runs(c: &mut Criterion) {
    let mut g = c.benchmark_group("run");
    g.sample_size(10);
    let lg = logistic();
    for cfg in [SolverConfig::adapgnc_1(), SolverConfig::adapgnc_2(), SolverConfig::adgd()] {
        let cfg = cfg.with_max_iters(2000);
        g.bench_function(format!("logistic_200x20/{}", cfg.name), |b| {
            b.iter(|| run(&lg.problem, &lg.x0, &cfg).unwrap().best_value)
        });
    }
    let ls = lasso();
    for cfg in [SolverConfig::adapgnc_2(), SolverConfig::adapgnc_bb_2(), SolverConfig::gd_ls()] {
        let cfg = cfg.with_tol(1e-10).with_max_iters(20_000);
        g.bench_function(format!("lasso_100x50/{}", cfg.name), |b| {
            b.iter(|| run(&ls.problem, &ls.x0, &cfg).unwrap().best_value)
        });
    }
    let nm = nmf();
    for cfg in [SolverConfig::adapgnc_1(), SolverConfig::adapgnc_2()] {
        let cfg = cfg.with_lambda0(1e-3).with_tol(1e-6).with_max_iters(50_000);
        g.bench_function(format!("nmf_200x5x300/{}", cfg.name), |b| {
            b.iter(|| run(&nm.problem, &nm.x0, &cfg).unwrap().best_value)
        });
    }
    g.finish();
}

fn monitor(c: &mut Criterion) {
    let (trace, info) = monitored_trace(2000);
    c.bench_function("monitor_check/logistic", |b| b.iter(|| replay(black_box(&trace), &info).passed()));
}

criterion_group!(benches, step_rules, full_runs, monitor);
criterion_main!(benches);
