//! Benchmark-only crate; see benches/partitioning.rs.
