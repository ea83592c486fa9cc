//! Benchmarks for the evolution engines live in `benches/`.
