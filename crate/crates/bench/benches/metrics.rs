use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use invmetric::ball::kobayashi_ball;
use invmetric::bounds::{kobayashi_upper_path, royden_interval, Backend};
use invmetric::domain::boundary_frame;
use invmetric::estimators::a_quantity;
use invmetric::{CVec, DomainSpec};

fn points() -> (CVec, CVec) {
    (CVec::from_reals(&[0.5, 0.1, 0.2, -0.1]), CVec::from_reals(&[-0.1, 0.3, 0.25, 0.1]))
}

fn frames(c: &mut Criterion) {
    let (z, _) = points();
    let ellipsoid = DomainSpec::ellipsoid(&[1.0, 4.0]).unwrap();
    let perturbed = DomainSpec::perturbed_ball(2, 0.05, CVec::from_real(&[0.6, 0.0]), 0.3).unwrap();
    c.bench_function("boundary_frame/ellipsoid", |b| b.iter(|| boundary_frame(&ellipsoid, black_box(&z)).unwrap()));
    c.bench_function("boundary_frame/perturbed", |b| b.iter(|| boundary_frame(&perturbed, black_box(&z)).unwrap()));
}

fn distances(c: &mut Criterion) {
    let (z, w) = points();
    let ball = DomainSpec::unit_ball(2);
    let ellipsoid = DomainSpec::ellipsoid(&[1.0, 4.0]).unwrap();
    c.bench_function("kobayashi_ball", |b| b.iter(|| kobayashi_ball(black_box(&z), black_box(&w)).unwrap()));
    c.bench_function("upper_path/ball/16", |b| {
        b.iter(|| kobayashi_upper_path(&ball, black_box(&z), black_box(&w), 16, Backend::ExactBall).unwrap())
    });
    c.bench_function("royden_interval/ellipsoid", |b| {
        b.iter(|| royden_interval(&ellipsoid, black_box(&z), black_box(&w)).unwrap())
    });
    c.bench_function("a_quantity/ellipsoid", |b| b.iter(|| a_quantity(&ellipsoid, black_box(&z), black_box(&w)).unwrap()));
}

criterion_group!(benches, frames, distances);
criterion_main!(benches);
