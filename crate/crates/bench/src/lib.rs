//! Criterion benchmarks of the core solvers; see `benches/solvers.rs`.
