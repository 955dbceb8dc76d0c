use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use iproj_bench::iproj::{
    kl_divergence, log_partition, pava, run, tilt_solve, AxisId, Constraint, DensityVector, DiscreteMeasure,
    SignConstraint, TiltProblem,
};
use iproj_bench::{smooth_square, two_moment_problem, wobble};

fn measures(c: &mut Criterion) {
    let mut group = c.benchmark_group("measure");
    for n in [64, 256] {
        let p = smooth_square(n);
        let q = DiscreteMeasure::uniform(p.grid().clone());
        let y = DensityVector::new(p.grid().clone(), wobble(p.len())).unwrap();
        group.bench_with_input(BenchmarkId::new("kl_divergence", n * n), &n, |b, _| {
            b.iter(|| kl_divergence(black_box(&p), black_box(&q)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("log_partition", n * n), &n, |b, _| {
            b.iter(|| log_partition(black_box(&y), black_box(&p)).unwrap())
        });
    }
    group.finish();
}

fn isotonic(c: &mut Criterion) {
    let mut group = c.benchmark_group("pava");
    for n in [256, 4096] {
        let values: Vec<f64> = wobble(n)
            .iter()
            .enumerate()
            .map(|(i, v)| v + i as f64 / n as f64)
            .collect();
        let weights = vec![1.0; n];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| pava(black_box(&values), black_box(&weights)).unwrap())
        });
    }
    group.finish();
}

fn projections(c: &mut Criterion) {
    let s = smooth_square(256);
    let g = s.grid().clone();
    let z = DensityVector::from_fn(g.clone(), |p| p[0] + p[1] - 1.3).unwrap();
    c.bench_function("tilt_solve/65536", |b| {
        b.iter(|| tilt_solve(&TiltProblem::new(black_box(&s), &z, SignConstraint::NonNegative)).unwrap())
    });

    let target = DiscreteMeasure::uniform(Arc::new(g.axis_grid(AxisId::Y).unwrap()));
    let order = Constraint::stochastic_order(AxisId::Y, target);
    c.bench_function("project/stochastic_order/65536", |b| {
        b.iter(|| order.project(black_box(&s)).unwrap())
    });
}

fn engine(c: &mut Criterion) {
    let problem = two_moment_problem(4096);
    c.bench_function("run/two_moments/4096", |b| b.iter(|| run(black_box(&problem)).unwrap()));
}

criterion_group!(benches, measures, isotonic, projections, engine);
criterion_main!(benches);
