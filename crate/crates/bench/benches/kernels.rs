use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use laserkit::{
    coherent_vector, evolve, factorization_check, matrix_exponential, rho_coherent_closed, von_neumann_entropy,
    ClosedPath, DensityMatrix, IntegrationConfig, KrausSet, LaserParams, C64,
};
use nalgebra::DMatrix;

fn coherent(z: f64, dim: usize) -> DensityMatrix {
    DensityMatrix::pure(&coherent_vector(C64::new(z, 0.0), dim, false).unwrap()).unwrap()
}

fn expm(c: &mut Criterion) {
    let mut group = c.benchmark_group("matrix_exponential");
    for dim in [16, 64, 256] {
        let m = DMatrix::from_fn(dim, dim, |r, k| {
            C64::new(((r * 7 + k * 3) % 11) as f64 / 11.0 - 0.5, ((r + k) % 5) as f64 / 10.0)
        });
        group.bench_with_input(BenchmarkId::from_parameter(dim), &m, |b, m| {
            b.iter(|| matrix_exponential(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn kraus(c: &mut Criterion) {
    let params = LaserParams::new(0.5, 1.0).unwrap();
    let mut group = c.benchmark_group("kraus");
    for dim in [32, 64] {
        let rho0 = coherent(1.0, dim);
        group.bench_with_input(BenchmarkId::new("adaptive_build", dim), &dim, |b, &dim| {
            b.iter(|| KrausSet::adaptive(&params, 0.5, dim, dim / 2).unwrap())
        });
        let ks = KrausSet::adaptive(&params, 0.5, dim, dim / 2).unwrap();
        group.bench_with_input(BenchmarkId::new("apply", dim), &rho0, |b, rho0| {
            b.iter(|| ks.apply(black_box(rho0)).unwrap())
        });
    }
    group.finish();
}

fn oracles(c: &mut Criterion) {
    let params = LaserParams::new(0.5, 1.0).unwrap();
    let dim = 64;
    let rho0 = coherent(2.0, dim);
    let mut group = c.benchmark_group("oracles");
    group.sample_size(10);
    group.bench_function("lindblad_rk4_t0.3_dim64", |b| {
        b.iter(|| evolve(black_box(&rho0), &params, 0.3, &IntegrationConfig::for_params(&params)).unwrap())
    });
    group.bench_function("closed_triple_dim64", |b| {
        b.iter(|| rho_coherent_closed(C64::new(2.0, 0.0), &params, 0.3, dim, ClosedPath::Triple).unwrap())
    });
    let out = rho_coherent_closed(C64::new(2.0, 0.0), &params, 0.3, dim, ClosedPath::Triple).unwrap();
    group.bench_function("entropy_dim64", |b| {
        b.iter(|| von_neumann_entropy(black_box(&out)).unwrap())
    });
    group.bench_function("factorization_check_dim16", |b| {
        b.iter(|| factorization_check(&LaserParams::new(0.5, 1.0).unwrap(), 0.3, 16).unwrap())
    });
    group.finish();
}

criterion_group!(benches, expm, kraus, oracles);
criterion_main!(benches);
