//! Criterion benchmarks: expansion throughput, the construction pipelines,
//! and the census sweep.

pub mod construction;
pub mod expansion;
