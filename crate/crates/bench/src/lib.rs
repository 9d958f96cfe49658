//! Criterion benchmarks for the planning hot paths; see `benches/`.
