//! Library side of the CLI: scenario-file parsing and CSV report rendering.
//! The binary in `main.rs` is a thin wrapper over these modules.

pub mod report;
pub mod scenario;
