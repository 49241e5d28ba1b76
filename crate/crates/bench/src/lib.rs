//! Criterion benchmarks for the hot numerical kernels; see `benches/`.
