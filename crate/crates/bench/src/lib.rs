//! Criterion benchmarks for the simulator; run with `cargo bench -p coopexec-bench`.
