use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use qbat_bench::{fixture, params};
use qbat_core::lindblad::{rk4_step, Lindbladian};
use qbat_core::{hermitian_eigen, integrate_until_steady};

const SIZES: [usize; 3] = [1, 10, 30];

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for n in SIZES {
        let (p, ops, rho) = fixture(n);
        let model = Lindbladian::dicke(&p, &ops).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| model.rhs(black_box(&rho), 0.3).unwrap())
        });
    }
    group.finish();
}

fn step(c: &mut Criterion) {
    let mut group = c.benchmark_group("rk4_step");
    for n in SIZES {
        let (p, ops, rho) = fixture(n);
        let model = Lindbladian::dicke(&p, &ops).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| rk4_step(black_box(&rho), 0.0, p.dt, |r, t| model.rhs(r, t).unwrap()).unwrap())
        });
    }
    group.finish();
}

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("hermitian_eigen");
    for n in SIZES {
        let (_, _, rho) = fixture(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| hermitian_eigen(black_box(&rho)).unwrap())
        });
    }
    group.finish();
}

fn steady(c: &mut Criterion) {
    let mut group = c.benchmark_group("integrate_until_steady");
    group.sample_size(10);
    for n in [1, 10] {
        let p = params(n, 200.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| integrate_until_steady(black_box(&p)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, rhs, step, eigen, steady);
criterion_main!(benches);
