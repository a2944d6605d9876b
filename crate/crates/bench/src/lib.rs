//! Criterion benchmarks for the simulation engine; see `benches/`.
