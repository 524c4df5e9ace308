//! Fixtures shared by unit tests.

use alloc::vec;

use rand::Rng;

use crate::model::{LeurnConfig, LeurnParams, Linear, Task};
use crate::numeric::{Matrix, SeededRng};

/// n = 1, d = 0, k = 2 model with tau0 = 0.3, head weight 2.0 and bias 0.1.
pub(crate) fn tiny() -> (LeurnParams, LeurnConfig) {
    let cfg = LeurnConfig::new(1, 0, 2, Task::Binary);
    let params = LeurnParams {
        tau0: vec![0.3],
        rule_layers: vec![],
        head: Linear {
            weights: Matrix::from_vec(1, 1, vec![2.0]).unwrap(),
            bias: vec![0.1],
        },
    };
    (params, cfg)
}

/// Parameters with thresholds on U(-1, 1) and weights and biases on U(-2, 2),
/// large enough that deeper thresholds move across the data.
pub(crate) fn random_params(cfg: &LeurnConfig, seed: u64) -> LeurnParams {
    let mut rng = SeededRng::new(seed);
    let mut p = LeurnParams::zeros(cfg);
    p.tau0.iter_mut().for_each(|t| *t = rng.random_range(-1.0..1.0));
    for layer in p.rule_layers.iter_mut().chain(core::iter::once(&mut p.head)) {
        layer.weights.as_mut_slice().iter_mut().for_each(|w| *w = rng.random_range(-2.0..2.0));
        layer.bias.iter_mut().for_each(|b| *b = rng.random_range(-2.0..2.0));
    }
    p
}
