use criterion::{criterion_group, criterion_main};

use surdforge_bench::{construction, expansion};

criterion_group!(
    benches,
    expansion::criterion_benchmark,
    construction::criterion_benchmark
);
criterion_main!(benches);
