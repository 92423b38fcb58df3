use std::hint::black_box;

use criterion::{Criterion, Throughput};
use num_bigint::BigUint;
use surdforge_core::cf::{expand_sqrt, scan_sqrt_u64};

pub fn criterion_benchmark(c: &mut Criterion) {
    let mut group = c.benchmark_group("expansion");

    // Word-sized throughput: all non-squares in a 10k window near 10^6.
    let window = 1_000_000u64..1_010_000;
    group.throughput(Throughput::Elements(window.end - window.start));
    group.bench_function("scan_u64_window_at_1e6", |b| {
        let mut buf = Vec::new();
        b.iter(|| {
            let mut total_coeffs = 0usize;
            for d in window.clone() {
                if scan_sqrt_u64(d, &mut buf).is_some() {
                    total_coeffs += buf.len();
                }
            }
            black_box(total_coeffs)
        })
    });

    // Large D with a short period (t^2 + 2 expands to [t; t, 2t]); a random
    // 18-digit D would have a period of ~1e9 coefficients.
    group.bench_function("expand_sqrt_u64_path", |b| {
        let t = 999_999_999u64;
        let d = BigUint::from(t * t + 2);
        b.iter(|| black_box(expand_sqrt(black_box(&d)).unwrap().k()))
    });

    // Bigint path: a 41-digit non-square with a short period.
    group.bench_function("expand_sqrt_bigint_path", |b| {
        let t = BigUint::from(10u32).pow(20);
        let d = &t * &t + 1u32;
        b.iter(|| black_box(expand_sqrt(black_box(&d)).unwrap().k()))
    });

    group.finish();
}
