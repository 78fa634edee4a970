//! Benchmark fixtures for `netctl-core`. The benches live in `benches/`.

pub use netctl_core;
