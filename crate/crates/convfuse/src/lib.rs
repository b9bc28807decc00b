//! Std companion to `convfuse-core`: PPM and container files, CSV formats,
//! a rayon executor and the pipeline stages behind the `convfuse` binary.

pub mod error;
pub mod files;
pub mod formats;
pub mod parallel;
pub mod pipeline;

pub use error::{Error, Result};
