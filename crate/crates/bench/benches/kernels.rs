//! Benchmarks for the hot numerical kernels: eigensolves, stationary
//! profiles, implicit time steps and short evolution runs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fde_lab::{
    assemble_laplacian, build_interval, build_radial_ball, eigenpairs, entropy_and_dissipation,
    gwpi_constant_empirical, rel_error, run_rescaled, solve_lane_emden, stationary_profile,
    step_implicit, EvolutionConfig, Field,
};
use std::f64::consts::PI;

fn bench_eigenpairs(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigenpairs");
    for n in [200usize, 400, 800] {
        let dom = build_interval(PI, n).unwrap();
        let op = assemble_laplacian(&dom);
        group.bench_with_input(BenchmarkId::new("interval_k4", n), &op, |b, op| {
            b.iter(|| eigenpairs(op, 4).unwrap())
        });
    }
    let ball = build_radial_ball(3, 1.0, 400).unwrap();
    let op = assemble_laplacian(&ball);
    group.bench_function("ball_d3_n400_k4", |b| b.iter(|| eigenpairs(&op, 4).unwrap()));
    group.finish();
}

fn bench_stationary_profile(c: &mut Criterion) {
    let dom = build_interval(PI, 800).unwrap();
    c.bench_function("stationary_profile_m05_n800", |b| {
        b.iter(|| stationary_profile(&dom, 0.5, 1.0).unwrap())
    });
}

fn bench_lane_emden(c: &mut Criterion) {
    let dom = build_interval(PI, 400).unwrap();
    c.bench_function("lane_emden_p15_n400", |b| {
        b.iter(|| solve_lane_emden(&dom, 1.5, None).unwrap())
    });
}

fn bench_implicit_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step_implicit");
    for n in [200usize, 800] {
        let dom = build_interval(PI, n).unwrap();
        let profile = stationary_profile(&dom, 0.5, 1.0).unwrap();
        let u = profile.s.scale(1.2);
        group.bench_with_input(BenchmarkId::new("fde_m05", n), &u, |b, u| {
            b.iter(|| step_implicit(u, 1e-3, 0.5, 1.0).unwrap())
        });
    }
    group.finish();
}

fn bench_short_run(c: &mut Criterion) {
    let dom = build_interval(PI, 200).unwrap();
    let profile = stationary_profile(&dom, 0.9, 1.0).unwrap();
    let v0 = Field::from_fn(&dom, |x| 1.0 + 0.2 * (2.0 * x).sin())
        .zip_map(&profile.s, |bump, s| bump * s)
        .unwrap();
    let mut cfg = EvolutionConfig::new(0.9);
    cfg.dt0 = 1e-3;
    cfg.max_steps = 200;
    cfg.store_every = 50;
    c.bench_function("run_rescaled_200_steps_n200", |b| {
        b.iter(|| run_rescaled(&v0, 0.9, 1.0, &cfg).unwrap())
    });
}

fn bench_entropy(c: &mut Criterion) {
    let dom = build_interval(PI, 800).unwrap();
    let profile = stationary_profile(&dom, 0.9, 1.0).unwrap();
    let v = profile.s.map(|s| s * 1.1);
    c.bench_function("entropy_and_dissipation_n800", |b| {
        b.iter(|| {
            let re = rel_error(&v, &profile.s, 0.9).unwrap();
            entropy_and_dissipation(&re, &profile.s, 0.9).unwrap()
        })
    });
    c.bench_function("gwpi_constant_n800", |b| {
        b.iter(|| gwpi_constant_empirical(&profile.s, 0.9, 1.0).unwrap())
    });
}

criterion_group!(
    benches,
    bench_eigenpairs,
    bench_stationary_profile,
    bench_lane_emden,
    bench_implicit_step,
    bench_short_run,
    bench_entropy
);
criterion_main!(benches);
