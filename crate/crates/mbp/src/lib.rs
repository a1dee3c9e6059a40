//! JSON formats and the command line over `mbp-core`.

pub mod cli;
pub mod json;

pub use mbp_core as core;
