//! Criterion benchmarks for the signature stack; see `benches/`.
