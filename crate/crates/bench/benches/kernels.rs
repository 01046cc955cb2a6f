use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracparts_core::arith::parse_rational;
use fracparts_core::meanvalue::vinogradov_count;
use fracparts_core::recovery::recover;
use fracparts_core::search::min_poly;
use fracparts_core::weyl::weyl_sum;
use fracparts_core::{default_precision, CoefficientVector, Limits};
use std::hint::black_box;

fn vector(k: u32, n: u64) -> CoefficientVector {
    let names = ["pi", "e", "sqrt2", "phi"];
    let coeffs: Vec<&str> = (0..k as usize).map(|i| names[i % names.len()]).collect();
    CoefficientVector::parse(&coeffs, default_precision(k, n)).unwrap()
}

fn weyl(c: &mut Criterion) {
    let lim = Limits::default();
    let mut g = c.benchmark_group("weyl_sum");
    for k in [2u32, 6] {
        let v = vector(k, 100_000);
        g.bench_with_input(BenchmarkId::from_parameter(k), &v, |b, v| {
            b.iter(|| weyl_sum(black_box(v), 100_000, &lim).unwrap())
        });
    }
    g.finish();
}

fn mean_value(c: &mut Criterion) {
    let lim = Limits::default();
    c.bench_function("vinogradov_count s=3 k=2 N=40", |b| {
        b.iter(|| vinogradov_count(3, 2, black_box(40), &lim).unwrap())
    });
}

fn minimize(c: &mut Criterion) {
    let lim = Limits::default();
    let v = vector(6, 1_000_000);
    c.bench_function("min_poly k=6 N=1e6", |b| {
        b.iter(|| min_poly(black_box(&v), 1_000_000, &lim).unwrap())
    });
}

fn recovery(c: &mut Criterion) {
    let lim = Limits::default();
    let v = CoefficientVector::parse(&["0", "0", "1/7"], default_precision(3, 343)).unwrap();
    let a = parse_rational("232").unwrap();
    let eps = parse_rational("0.15").unwrap();
    c.bench_function("recover 1/7 cube", |b| {
        b.iter(|| recover(black_box(&v), 343, &a, &eps, &lim).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = weyl, mean_value, minimize, recovery
}
criterion_main!(benches);
