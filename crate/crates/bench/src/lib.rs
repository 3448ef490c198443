//! Benchmarks for the shooting and finite-element solvers live in `benches/`.
