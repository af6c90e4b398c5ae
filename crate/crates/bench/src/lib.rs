//! Criterion benchmarks for the numerical kernels and the simulator; see `benches/`.
