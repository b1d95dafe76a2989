//! Library half of the `ukrnp` command: batch commands and the annotation
//! HTTP service, kept here so integration tests can drive them directly.

pub mod commands;
pub mod server;

/// Environment variable that overrides the annotation storage directory.
pub const STORAGE_ENV: &str = "UKRNP_STORAGE";
