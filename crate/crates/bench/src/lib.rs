//! Criterion benchmarks for the samplers live under `benches/`.
