use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hodge_bench::{dense, potential};
use hodge_core::free_energy::{free_energy_coefficient, intersection};
use hodge_core::hierarchy::Hierarchy;
use hodge_core::hodge_recursion::{HodgeOptions, HodgeSystem};
use hodge_core::lambda_extract::extract_all;
use hodge_core::DiffPoly;

fn ring(c: &mut Criterion) {
    let a = dense(8);
    let h3 = potential(3);
    c.bench_function("ring/mul dense8^2", |b| b.iter(|| black_box(&a) * black_box(&a)));
    c.bench_function("ring/dx H3", |b| b.iter(|| black_box(&h3).dx()));
    let text = h3.canonical_text();
    c.bench_function("ring/parse H3", |b| b.iter(|| DiffPoly::parse(black_box(&text)).unwrap()));
}

fn oracle(c: &mut Criterion) {
    c.bench_function("oracle/memoized <tau_2^3 tau_3^2>_3", |b| b.iter(|| intersection(3, black_box(&[2, 2, 2, 3, 3]))));
    c.bench_function("oracle/F3 coefficient", |b| b.iter(|| free_energy_coefficient(3, black_box(&[1, 0, 2, 1]))));
}

fn recursion(c: &mut Criterion) {
    potential(3);
    let mut g = c.benchmark_group("recursion");
    g.sample_size(10);
    g.bench_function("H1..H3 from fitted F", |b| {
        b.iter(|| HodgeSystem::build(3, &HodgeOptions::default(), None).unwrap())
    });
    let h3 = potential(3);
    g.bench_function("lambda extraction genus 3", |b| b.iter(|| extract_all(3, black_box(&h3)).unwrap()));
    g.bench_function("hierarchy eps^4 flow t1", |b| {
        b.iter(|| Hierarchy::generic(4).unwrap().flow(1))
    });
    g.finish();
}

criterion_group!(benches, ring, oracle, recursion);
criterion_main!(benches);
