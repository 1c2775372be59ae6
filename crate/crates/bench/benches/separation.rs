use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spls_bench::{instance, root_point};
use spls_core::cuts::{separate_mixing, separate_new, separate_stock};

fn separation(c: &mut Criterion) {
    let mut group = c.benchmark_group("separation");
    for m in [100, 500] {
        let inst = instance(10, m, 0.05);
        let stats = inst.stats();
        let point = root_point(&inst);
        group.bench_with_input(BenchmarkId::new("mixing", m), &m, |b, _| {
            b.iter(|| separate_mixing(black_box(&stats), black_box(&point)))
        });
        group.bench_with_input(BenchmarkId::new("new", m), &m, |b, _| {
            b.iter(|| separate_new(black_box(&stats), black_box(&point)))
        });
        group.bench_with_input(BenchmarkId::new("stock", m), &m, |b, _| {
            b.iter(|| separate_stock(black_box(&stats), black_box(&point)))
        });
    }
    group.finish();
}

criterion_group!(benches, separation);
criterion_main!(benches);
