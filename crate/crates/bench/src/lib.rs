//! Criterion benchmarks for the construction live in `benches/`; this crate
//! exports nothing.
