use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use dampwave_bench::{state, system, SIZES};
use dampwave_core::evolution::Integrator;

fn helmholtz(c: &mut Criterion) {
    let mut group = c.benchmark_group("helmholtz_solve");
    for n in SIZES {
        let sys = system(n);
        let b = state(&sys).u;
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| sys.mass().solve(black_box(&b)).unwrap())
        });
    }
    group.finish();
}

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for n in SIZES {
        let sys = system(n);
        let s = state(&sys);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| sys.rhs(black_box(&s.u), black_box(&s.v)).unwrap())
        });
    }
    group.finish();
}

fn rk4_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("rk4_step");
    for n in SIZES {
        let sys = system(n);
        let mut integrator = Integrator::new(&sys);
        let mut s = state(&sys);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| integrator.step(black_box(&mut s), 2e-3).unwrap())
        });
    }
    group.finish();
}

criterion_group!(kernels, helmholtz, rhs, rk4_step);
criterion_main!(kernels);
