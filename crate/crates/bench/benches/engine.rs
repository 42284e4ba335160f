use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nframes_bench::{flat_surface, nonlinear, path, sample_points};
use nframes_core::corpus;
use nframes_core::expr::{bundle_vars, parse};
use nframes_core::{
    curvature, derive2, normal_along_map, normal_along_path, normal_at_point, transform_coefficients, MapOptions,
    PathOptions, PointNormalSpec,
};

fn derivatives(c: &mut Criterion) {
    let e = parse("sin(u1*u2) + exp(u3)/(1 + u1^2) + sqrt(u2^2 + 1)", &bundle_vars(3)).unwrap();
    let f = e.bind(3);
    let x = [0.3, -0.7, 0.2];
    c.bench_function("derive2 mixed", |b| b.iter(|| derive2(&f, black_box(&x), 0, 1).unwrap()));
}

fn coefficients(c: &mut Criterion) {
    let conn = nonlinear();
    let pts = sample_points(&conn, 64);
    let change = corpus::random_admissible_change(conn.shape, 3);
    c.bench_function("curvature x64", |b| {
        b.iter(|| pts.iter().map(|p| curvature(&conn, p).unwrap().max_abs()).sum::<f64>())
    });
    c.bench_function("transform_coefficients x64", |b| {
        b.iter(|| pts.iter().map(|p| transform_coefficients(&conn, &change, p).unwrap().max_abs()).sum::<f64>())
    });
}

fn normal_coordinates(c: &mut Criterion) {
    let conn = nonlinear();
    let spec = PointNormalSpec::new(vec![0.2, -0.1, 0.4], 1);
    c.bench_function("normal_at_point", |b| b.iter(|| normal_at_point(&conn, black_box(&spec)).unwrap()));

    let beta = path(&conn);
    let opts = PathOptions { quad_step: 1e-2, samples: 11, tol: 1e-6 };
    c.bench_function("normal_along_path", |b| {
        b.iter(|| normal_along_path(&conn, &beta, 0.0, None, None, opts).unwrap().report.max_residual)
    });

    let (flat, surface) = flat_surface();
    let opts = MapOptions { grid: 5, ..MapOptions::default() };
    let mut group = c.benchmark_group("map");
    group.sample_size(10);
    group.bench_function("normal_along_map 5x5", |b| {
        b.iter(|| normal_along_map(&flat, &surface, &[0.0, 0.0], &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, derivatives, coefficients, normal_coordinates);
criterion_main!(benches);
