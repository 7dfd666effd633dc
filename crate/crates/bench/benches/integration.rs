use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use hrw_bench::{expr, integrand, point, unit_disc, unit_square, PRECISION};
use hrw_core::integration::{gauge_sum, inner_sum, riemann_sum, Gauge, GaugeMode, PartitionSpec, TagRule};

fn riemann(c: &mut Criterion) {
    let rect = unit_square();
    let poly = integrand("x^2*y+y^3", 2);
    let trig = integrand("sin(x*y)", 2);
    let mut g = c.benchmark_group("riemann");
    g.sample_size(10);
    for n in [16, 64] {
        let spec = PartitionSpec::uniform(n, 2);
        g.bench_with_input(BenchmarkId::new("polynomial", n), &n, |b, _| {
            b.iter(|| black_box(riemann_sum(&poly, &rect, &spec, TagRule::MinVertex, PRECISION).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("sin", n), &n, |b, _| {
            b.iter(|| black_box(riemann_sum(&trig, &rect, &spec, TagRule::Center, PRECISION).unwrap()))
        });
    }
    g.finish();
}

fn regions(c: &mut Criterion) {
    let disc = unit_disc();
    let weight = integrand("x^2+y^2", 2);
    let mut g = c.benchmark_group("region");
    g.sample_size(10);
    for n in [32, 128] {
        let spec = PartitionSpec::uniform(n, 2);
        g.bench_with_input(BenchmarkId::new("disc moment", n), &n, |b, _| {
            b.iter(|| black_box(inner_sum(&weight, &disc, &spec, PRECISION).unwrap()))
        });
    }
    g.finish();
}

fn gauges(c: &mut Criterion) {
    let f = expr("x^2");
    let gauge = Gauge::new(expr("x/20+1/100")).unwrap();
    let mut g = c.benchmark_group("gauge");
    for mode in [GaugeMode::TagInCell, GaugeMode::McShane] {
        g.bench_function(mode.name(), |b| {
            b.iter(|| black_box(gauge_sum(&f, &point(0, 1), &point(1, 1), &gauge, mode, PRECISION).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, riemann, regions, gauges);
criterion_main!(benches);
