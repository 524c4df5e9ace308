//! The LEURN network: quantized-tanh rule layers and a linear head.
//!
//! Layer `i` computes, per feature, `s_i = qtanh(x + tau_i)` and the embedding
//! `e_i = s_i * tanh(tau_i)`. The next thresholds are a linear map of every
//! embedding so far, `tau_{i+1} = W_i^T e_{0:i} + beta_i`, and the head maps
//! the full concatenation `e_{0:d}` to logits.

mod backward;
mod config;
pub(crate) mod forward;
mod params;
mod qtanh;

pub use backward::{backward, backward_into};
pub use config::{LeurnConfig, Task};
pub use forward::{forward, forward_with, output_activation, predict, ForwardMode, ForwardTrace};
pub use params::{Linear, LeurnParams};
pub use qtanh::{qtanh, QTanh};
