use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ym2_bench::{rectangle, triangle, two_lap};
use ym2_core::wick_algebra::enumerate_pairings;
use ym2_core::{mc_wilson, wilson_series_continuum_pax, wilson_series_lattice, EngineConfig, GaugeChoice, Representation};

fn su2() -> Representation {
    Representation::parse("su2:fund").unwrap()
}

fn bench_continuum(c: &mut Criterion) {
    let rep = su2();
    let cfg = EngineConfig::default();
    let mut g = c.benchmark_group("continuum_pax");
    for k in [2, 4, 6] {
        g.bench_with_input(BenchmarkId::new("two_lap", k), &k, |b, &k| {
            b.iter(|| wilson_series_continuum_pax(black_box(&two_lap()), &rep, k, &cfg).unwrap())
        });
    }
    g.finish();
}

fn bench_lattice(c: &mut Criterion) {
    let rep = su2();
    let cfg = EngineConfig::default();
    let mut g = c.benchmark_group("lattice_sweep");
    g.sample_size(10);
    for n in [32, 64, 128] {
        g.bench_with_input(BenchmarkId::new("triangle_ax_k3", n), &n, |b, &n| {
            b.iter(|| wilson_series_lattice(black_box(&triangle()), &rep, GaugeChoice::Ax, 3, n, &cfg).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("two_lap_pax_k3", n), &n, |b, &n| {
            b.iter(|| wilson_series_lattice(black_box(&two_lap()), &rep, GaugeChoice::Pax, 3, n, &cfg).unwrap())
        });
    }
    g.finish();
}

fn bench_pairings(c: &mut Criterion) {
    c.bench_function("pairings_10_slots", |b| b.iter(|| enumerate_pairings(black_box(10), 5).unwrap().len()));
}

fn bench_mc(c: &mut Criterion) {
    let rep = su2();
    let mut g = c.benchmark_group("mc");
    g.sample_size(10);
    g.bench_function("rectangle_n64_1000", |b| b.iter(|| mc_wilson(black_box(&rectangle()), &rep, 0.2, 64, 1000, 1).unwrap()));
    g.finish();
}

criterion_group!(benches, bench_continuum, bench_lattice, bench_pairings, bench_mc);
criterion_main!(benches);
