//! Criterion benchmarks for levy-transport live in `benches/`.
