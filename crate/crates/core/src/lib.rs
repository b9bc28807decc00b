//! Allocation-only core of a two-network ConvNet ensemble for binary
//! image and video classification.
//!
//! Everything here is a pure function of its inputs: dense `f64` tensors
//! and layer kernels with hand-written backward passes, declarative network
//! specs, the preprocessing chain, last-layer fine-tuning and full training,
//! score fusion, threshold ROC sweeps, video voting and fold statistics.
//! File IO, the CLI and parallel execution live in the `convfuse` crate.

#![no_std]

extern crate alloc;

pub mod container;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod models;
pub mod numerics;
pub mod score;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
pub use score::{ClassLabel, ScorePair};
pub use tensor::Tensor;
