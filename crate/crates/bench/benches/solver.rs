use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use bezier_bvp::{builtin, compile_residual, integrate, parse, solve, IvpSpec, SolverConfig};
use bezier_bvp_bench::oscillating_polygon;

fn curve_evaluation(c: &mut Criterion) {
    let small = oscillating_polygon(9);
    let large = oscillating_polygon(21);
    c.bench_function("eval de Casteljau degree 8", |b| {
        b.iter(|| small.eval(black_box(0.37)).unwrap())
    });
    c.bench_function("eval de Casteljau degree 20", |b| {
        b.iter(|| large.eval(black_box(0.37)).unwrap())
    });
    c.bench_function("eval direct sum degree 8", |b| {
        b.iter(|| small.eval_direct(black_box(0.37)).unwrap())
    });
}

fn full_solves(c: &mut Criterion) {
    let parabola = builtin("parabola").unwrap();
    let riccati = builtin("riccati").unwrap();
    c.bench_function("solve parabola dt=0.1", |b| {
        b.iter(|| solve(black_box(&parabola), &SolverConfig::default().with_dt(0.1)).unwrap())
    });
    c.bench_function("solve riccati dt=0.15", |b| {
        b.iter(|| solve(black_box(&riccati), &SolverConfig::default().with_dt(0.15)).unwrap())
    });
}

fn oracle_integration(c: &mut Criterion) {
    let spec = IvpSpec::new(Arc::new(|x, y: f64| x + y * y), 0.0, 1.0, 0.9);
    c.bench_function("oracle riccati to x=0.9", |b| {
        b.iter(|| integrate(black_box(&spec)).unwrap())
    });
}

fn expression_handling(c: &mut Criterion) {
    c.bench_function("parse riccati residual", |b| {
        b.iter(|| parse(black_box("dy - x - y^2")).unwrap())
    });
    let residual = compile_residual(parse("dy - x - y^2").unwrap());
    c.bench_function("eval compiled residual", |b| {
        b.iter(|| residual(black_box(0.4), black_box(2.1), black_box(5.0)))
    });
}

criterion_group!(
    benches,
    curve_evaluation,
    full_solves,
    oracle_integration,
    expression_handling
);
criterion_main!(benches);
