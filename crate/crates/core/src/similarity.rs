//! Embedding similarity and nearest-neighbour confidence.
//!
//! A sample's embedding `e_{0:d}` records its thresholds and responses, and
//! every sample in the same region shares it. The RBF kernel of two
//! embeddings is a similarity; the largest similarity to the training set is
//! a confidence score that drops for inputs far from any training region.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{shape_err, Error, Result};
use crate::model::{forward, forward::forward_unchecked, ForwardMode, LeurnConfig, LeurnParams, QTanh};
use crate::numeric::{math, Matrix};

/// The concatenated embedding `e_{0:d}` of `x_std`.
pub fn embed(params: &LeurnParams, cfg: &LeurnConfig, x_std: &[f64]) -> Result<Vec<f64>> {
    Ok(forward(params, cfg, x_std)?.embedding)
}

/// `exp(-gamma * |a - b|^2)`.
pub fn rbf_similarity(a: &[f64], b: &[f64], gamma: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(shape_err!("embeddings of length {} and {}", a.len(), b.len()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Config(format!("RBF gamma must be positive, got {gamma}")));
    }
    Ok(kernel(a, b, gamma))
}

fn kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    math::exp(-gamma * d2)
}

/// Training-set embeddings for confidence scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingIndex {
    pub embeddings: Matrix,
    pub gamma: f64,
}

impl EmbeddingIndex {
    /// Embeds every row of `data`. `gamma` defaults to `1 / embedding length`.
    pub fn build(params: &LeurnParams, cfg: &LeurnConfig, data: &Dataset, gamma: Option<f64>) -> Result<Self> {
        params.validate(cfg)?;
        if data.n_features() != cfg.n_features {
            return Err(shape_err!(
                "dataset has {} features, model expects {}",
                data.n_features(),
                cfg.n_features
            ));
        }
        let q = QTanh::new(cfg.regions)?;
        let width = cfg.embedding_len();
        let mut flat = Vec::with_capacity(data.len() * width);
        for i in 0..data.len() {
            crate::model::forward::check_input(cfg, data.row(i))?;
            flat.extend(forward_unchecked(params, cfg, &q, data.row(i), ForwardMode::Eval).embedding);
        }
        let gamma = gamma.unwrap_or(1.0 / width as f64);
        let index = Self {
            embeddings: Matrix::from_vec(data.len(), width, flat)?,
            gamma,
        };
        index.validate()?;
        Ok(index)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("RBF gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.embeddings.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest similarity between `embedding` and any indexed row.
    pub fn max_similarity(&self, embedding: &[f64]) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::Empty("embedding index".into()));
        }
        if embedding.len() != self.embeddings.cols() {
            return Err(shape_err!(
                "embedding of length {} for an index of width {}",
                embedding.len(),
                self.embeddings.cols()
            ));
        }
        Ok(self
            .embeddings
            .iter_rows()
            .map(|row| kernel(row, embedding, self.gamma))
            .fold(0.0, f64::max))
    }
}

/// Confidence of the model on `x_std`: nearest-neighbour RBF similarity to the index.
pub fn confidence(params: &LeurnParams, cfg: &LeurnConfig, index: &EmbeddingIndex, x_std: &[f64]) -> Result<f64> {
    index.max_similarity(&embed(params, cfg, x_std)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Task;
    use crate::rules::{extract_region, generate};
    use crate::data::SampleDomain;
    use crate::numeric::SeededRng;
    use crate::testutil::{random_params, tiny};
    use alloc::vec;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn tiny_embedding() {
        let (p, cfg) = tiny();
        let e = embed(&p, &cfg, &[0.5]).unwrap();
        assert_eq!(e, vec![0.5 * math::tanh(0.3)]);
        assert!((e[0] - 0.145655).abs() < 1e-5);
    }

    #[test]
    fn zero_thresholds_embed_to_zero() {
        let cfg = LeurnConfig::new(3, 2, 4, Task::Binary);
        let p = LeurnParams::zeros(&cfg);
        assert_eq!(embed(&p, &cfg, &[0.3, -2.0, 1.0]).unwrap(), vec![0.0; 9]);
    }

    #[test]
    fn kernel_values() {
        assert_eq!(rbf_similarity(&[1.0, 2.0], &[1.0, 2.0], 0.5).unwrap(), 1.0);
        let v = rbf_similarity(&[0.0, 0.0], &[1.0, 0.0], 1.0).unwrap();
        assert!((v - 0.367879).abs() < 1e-6);
        assert!(rbf_similarity(&[0.0], &[0.0, 1.0], 1.0).is_err());
        assert!(rbf_similarity(&[0.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn same_region_same_embedding() {
        let cfg = LeurnConfig::new(2, 2, 3, Task::Binary);
        let p = random_params(&cfg, 5);
        let x = [0.1, 0.4];
        let (region, _) = extract_region(&p, &cfg, &x).unwrap();
        let domain: Vec<SampleDomain> = (0..2).map(|c| SampleDomain::Continuous { column: c, min: -3.0, max: 3.0 }).collect();
        let mut rng = SeededRng::new(1);
        let e = embed(&p, &cfg, &x).unwrap();
        let data = Dataset::new(Matrix::from_vec(1, 2, x.to_vec()).unwrap(), vec![0.0]).unwrap();
        let index = EmbeddingIndex::build(&p, &cfg, &data, None).unwrap();
        assert_eq!(index.gamma, 1.0 / 6.0);
        for _ in 0..100 {
            let y = generate(&region, &domain, &mut rng).unwrap();
            assert_eq!(embed(&p, &cfg, &y).unwrap(), e);
            assert_eq!(confidence(&p, &cfg, &index, &y).unwrap(), 1.0);
        }
    }

    #[test]
    fn training_samples_are_fully_confident() {
        let cfg = LeurnConfig::new(3, 1, 5, Task::Binary);
        let p = random_params(&cfg, 2);
        let mut rng = SeededRng::new(4);
        let x = Matrix::from_vec(30, 3, (0..90).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
        let data = Dataset::new(x, vec![0.0; 30]).unwrap();
        let index = EmbeddingIndex::build(&p, &cfg, &data, Some(0.3)).unwrap();
        assert_eq!(index.len(), 30);
        for i in 0..30 {
            assert_eq!(confidence(&p, &cfg, &index, data.row(i)).unwrap(), 1.0);
        }
        let empty = EmbeddingIndex {
            embeddings: Matrix::zeros(0, 6),
            gamma: 1.0,
        };
        assert!(matches!(confidence(&p, &cfg, &empty, &[0.0; 3]), Err(Error::Empty(_))));
    }

    proptest! {
        #[test]
        fn kernel_properties(
            a in prop::collection::vec(-1.0f64..1.0, 5),
            b in prop::collection::vec(-1.0f64..1.0, 5),
            gamma in 0.01f64..10.0,
            t in 1.0f64..3.0,
        ) {
            let ab = rbf_similarity(&a, &b, gamma).unwrap();
            prop_assert_eq!(ab, rbf_similarity(&b, &a, gamma).unwrap());
            prop_assert!(ab > 0.0 && ab <= 1.0);
            prop_assert_eq!(rbf_similarity(&a, &a, gamma).unwrap(), 1.0);
            // moving b further from a along the same direction never raises similarity
            let far: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + t * (y - x)).collect();
            prop_assert!(rbf_similarity(&a, &far, gamma).unwrap() <= ab);
        }

        #[test]
        fn embedding_entries_are_bounded(seed in 0u64..500, k in 2usize..10, x in prop::collection::vec(-4.0f64..4.0, 3)) {
            let cfg = LeurnConfig::new(3, 2, k, Task::Regression);
            let p = random_params(&cfg, seed);
            let bound = 1.0 - 1.0 / k as f64;
            for e in embed(&p, &cfg, &x).unwrap() {
                prop_assert!(e.is_finite() && e.abs() <= bound);
            }
        }
    }
}
