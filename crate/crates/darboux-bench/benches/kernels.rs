//! Timings for the dense kernels and one full verification pass.
//!
//! Sample counts are kept low: the point is catching order-of-magnitude
//! regressions in the hot paths, not tracking single-digit percentages.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use darboux_bench::{lifted_matrix, rng, scalar_family, scalar_triple, seeded_triple};
use darboux_core::matrix::{expm, solve_sylvester};
use darboux_core::{evolve, run_suite, BoxDomain, HamiltonianFamily, TimeGrid, Tolerances};

fn bench_expm(c: &mut Criterion) {
    let mut group = c.benchmark_group("matrix_exponential");
    for n in [4usize, 8, 16] {
        let m = darboux_bench::random_matrix(&mut rng(11), n, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| expm(black_box(m)).expect("finite square input"))
        });
    }
    group.finish();
}

fn bench_displacement(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("displacement_solve");
    for n in [4usize, 8] {
        let mut r = rng(23);
        let a = lifted_matrix(&mut r, n);
        let p = darboux_bench::random_matrix(&mut r, n, 2);
        let q = (&p * &p.adjoint()).scale(Complex64::new(0.0, 1.0));
        group.bench_with_input(BenchmarkId::from_parameter(n), &(a, q), |b, (a, q)| {
            b.iter(|| solve_sylvester(black_box(a), black_box(q), &tol).expect("lifted spectrum"))
        });
    }
    group.finish();
}

fn bench_evolve(c: &mut Criterion) {
    let tol = Tolerances::default();
    let grid = TimeGrid::new(1.0, 1000).expect("valid grid");
    let mut group = c.benchmark_group("evolve");

    let scalar = scalar_triple();
    let scalar_fam = scalar_family();
    group.bench_function("scalar_1000_steps", |b| {
        b.iter(|| evolve(black_box(&scalar), &scalar_fam, &grid, &tol).expect("scalar run"))
    });

    let triple = seeded_triple(37, 4, 2, 2);
    let family = HamiltonianFamily::ConstantSignature { m1: 1, m2: 1 };
    group.bench_function("n4_m2_r2_1000_steps", |b| {
        b.iter(|| evolve(black_box(&triple), &family, &grid, &tol).expect("seeded run"))
    });
    group.finish();
}

fn bench_suite(c: &mut Criterion) {
    let tol = Tolerances::default();
    let grid = TimeGrid::new(1.0, 1000).expect("valid grid");
    let triple = scalar_triple();
    let family = scalar_family();
    let domain = BoxDomain::unit(1);
    c.bench_function("verification_suite/scalar", |b| {
        b.iter(|| {
            run_suite(black_box(&triple), &family, &grid, &domain, None, 7, &tol)
                .expect("scalar suite runs")
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default()
        .sample_size(10)
        .warm_up_time(Duration::from_millis(200))
        .measurement_time(Duration::from_millis(700));
    targets = bench_expm, bench_displacement, bench_evolve, bench_suite
}
criterion_main!(benches);
