//! Library surface of the harness: config parsing, experiment execution,
//! CSV emission, presets, and the certification suite. The `dbb` binary is a
//! thin CLI over these modules.

pub mod config;
pub mod csv;
pub mod presets;
pub mod runner;
pub mod verify;
