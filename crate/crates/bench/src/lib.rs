//! Benchmarks live under `benches/`; this crate only exists to host them.
//!
//! Run with `cargo bench -p convlab-bench`.

pub use convlab_core as core;
