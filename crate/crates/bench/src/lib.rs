//! Criterion benchmarks for lspec-core live under `benches/`.
