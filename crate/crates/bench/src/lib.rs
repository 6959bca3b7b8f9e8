//! Criterion benchmarks for the `apgt` crate live in `benches/`.
