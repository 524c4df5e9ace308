//! LEURN: neural networks that learn univariate threshold rules.
//!
//! Every layer of a LEURN model compares each standardized input feature
//! against a learned threshold through a quantized `tanh`. The resulting
//! indicator, multiplied by `tanh` of the threshold, is an embedding; a linear
//! layer over all embeddings so far produces the next thresholds, and a final
//! linear head produces the score. Because the only nonlinearity is a
//! per-feature quantizer, the network is exactly a univariate decision tree and
//! every score decomposes additively into rule contributions.
//!
//! This crate is `no_std` (with `alloc`) and holds all of the math: the model,
//! its training loop, region extraction, explanations, similarity scoring,
//! preprocessing and the hyperparameter search protocol. File formats and the
//! command line live in the `leurn` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod data;
pub mod error;
pub mod explain;
pub mod hpo;
pub mod model;
pub mod numeric;
pub mod rules;
pub mod similarity;
pub mod train;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use model::{ForwardMode, ForwardTrace, LeurnConfig, LeurnParams, Task};
pub use numeric::{Matrix, SeededRng};
