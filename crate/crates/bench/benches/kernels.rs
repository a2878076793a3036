use std::hint::black_box;

use cluster_virial::mayer::{ursell_weight, ursell_weight_fast};
use cluster_virial::virial::{invert_density_series, VirialTransform};
use cluster_virial_bench::{chain, mayer_vector, square_well};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn ursell(c: &mut Criterion) {
    let p = square_well();
    let mut group = c.benchmark_group("ursell_weight");
    for k in [4, 5, 6] {
        let x = chain(k);
        group.bench_with_input(BenchmarkId::new("graph_sum", k), &x, |b, x| {
            b.iter(|| ursell_weight(&p, black_box(x), 2.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("subset_recursion", k), &x, |b, x| {
            b.iter(|| ursell_weight_fast(&p, black_box(x), 2.0).unwrap())
        });
    }
    group.finish();
}

fn transform(c: &mut Criterion) {
    let t = VirialTransform::standard();
    let mut group = c.benchmark_group("virial");
    for n in [8, 12, 16] {
        let b = mayer_vector(n);
        group.bench_with_input(BenchmarkId::new("transform_d_n", n), &b, |bench, b| {
            bench.iter(|| t.d(black_box(b), n).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("series_inversion", n), &b, |bench, b| {
            bench.iter(|| invert_density_series(black_box(b)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ursell, transform);
criterion_main!(benches);
