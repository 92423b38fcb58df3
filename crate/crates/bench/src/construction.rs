use std::hint::black_box;

use criterion::Criterion;
use num_bigint::{BigInt, BigUint};
use surdforge_core::census::sweep;
use surdforge_core::{construct_mod_n, period4_construct, SearchLimits};

pub fn criterion_benchmark(c: &mut Criterion) {
    let limits = SearchLimits::default();

    let mut group = c.benchmark_group("construction");
    group.bench_function("construct_mod_n_99_k8", |b| {
        let n = BigUint::from(99u32);
        let m = BigInt::from(2);
        b.iter(|| black_box(construct_mod_n(&m, &n, 8, &limits).unwrap().d))
    });
    group.bench_function("period4_construct_mod_50", |b| {
        let n = BigUint::from(50u32);
        let m = BigInt::from(3);
        b.iter(|| black_box(period4_construct(&m, &n, &limits).unwrap().d))
    });
    group.finish();

    let mut group = c.benchmark_group("census");
    group.sample_size(10);
    let shards = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1);
    group.bench_function("sweep_to_1e5", |b| {
        b.iter(|| black_box(sweep(2, 100_000, shards).period_counts.len()))
    });
    group.finish();
}
