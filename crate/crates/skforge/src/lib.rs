//! File formats, verification suites and the benchmark harness around
//! `skforge-core`.

pub mod bench;
pub mod gateset;
pub mod manifest;
pub mod netfile;
pub mod verify;
