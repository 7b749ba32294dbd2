use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use prodstate_core::oracle::exact_max_eigenvalue_with;
use prodstate_core::ratio_numerics::{approx_ratio_bfv, hyp2f1_half};
use prodstate_core::rounding::round;
use prodstate_core::{
    best_product_state, generate, solve_moment_sdp, ExactMethod, FamilyTag, GenerateParams, GraphKind, Instance, Rank,
    Scheme, SolverConfig,
};

fn gnp(n: usize, tag: FamilyTag) -> Instance {
    generate(GraphKind::RandomGnp { n, p: 0.5 }, GenerateParams::family(tag), 7).unwrap()
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("moment_sdp");
    for n in [8, 16, 32] {
        let inst = gnp(n, FamilyTag::ANTIFERROMAGNET);
        let cfg = SolverConfig {
            restarts: 1,
            ..SolverConfig::with_seed(1)
        };
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| solve_moment_sdp(black_box(inst), &cfg).unwrap())
        });
    }
    group.finish();
}

fn rounding(c: &mut Criterion) {
    let inst = gnp(16, FamilyTag::XY);
    let sol = solve_moment_sdp(&inst, &SolverConfig::with_seed(1)).unwrap();
    let mut group = c.benchmark_group("rounding_100_trials");
    for scheme in [Scheme::Bfv, Scheme::Axis] {
        group.bench_function(format!("{scheme:?}"), |b| {
            b.iter(|| round(scheme, black_box(&inst), &sol, 100, 3).unwrap())
        });
    }
    group.finish();
}

fn hypergeometric(c: &mut Criterion) {
    c.bench_function("hyp2f1_half_r3", |b| {
        b.iter(|| hyp2f1_half(Rank::THREE, black_box(0.9)).unwrap())
    });
    c.bench_function("ratio_curve_r2_step_1e-3", |b| {
        b.iter(|| approx_ratio_bfv(Rank::TWO, black_box(1e-3)).unwrap())
    });
}

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_max_eigenvalue");
    group.sample_size(10);
    for n in [8, 10] {
        let inst = gnp(n, FamilyTag::ANTIFERROMAGNET);
        group.bench_with_input(BenchmarkId::new("dense", n), &inst, |b, inst| {
            b.iter(|| exact_max_eigenvalue_with(inst, ExactMethod::FullDense).unwrap())
        });
    }
    for n in [10, 14] {
        let inst = gnp(n, FamilyTag::ANTIFERROMAGNET);
        group.bench_with_input(BenchmarkId::new("lanczos", n), &inst, |b, inst| {
            b.iter(|| exact_max_eigenvalue_with(inst, ExactMethod::Lanczos).unwrap())
        });
    }
    group.finish();
}

fn product_search(c: &mut Criterion) {
    let inst = gnp(16, FamilyTag::ANTIFERROMAGNET);
    c.bench_function("product_search_16q_50_restarts", |b| {
        b.iter(|| best_product_state(black_box(&inst), 50, 0))
    });
}

criterion_group!(benches, solver, rounding, hypergeometric, eigen, product_search);
criterion_main!(benches);
