//! Versioned JSON persistence of a trained model with its preprocessing.

use std::path::Path;

use leurn_core::data::{Preprocessor, Schema};
use leurn_core::model::{LeurnConfig, LeurnParams};
use leurn_core::similarity::EmbeddingIndex;
use leurn_core::train::{Metric, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, Result};

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

/// How a bundle's model was trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub train: TrainConfig,
    pub metric: Metric,
    /// Best validation metric of the saved checkpoint.
    pub val_metric: Option<f64>,
    pub best_epoch: Option<usize>,
    pub n_train: usize,
    pub n_val: usize,
    /// Seconds since the Unix epoch, only when supplied explicitly, so
    /// identical inputs produce identical bundles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

/// Everything needed to score, explain and sample raw rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub config: LeurnConfig,
    pub params: LeurnParams,
    pub preprocessor: Preprocessor,
    pub schema: Schema,
    #[serde(default)]
    pub index: Option<EmbeddingIndex>,
    pub provenance: Provenance,
}

impl ModelBundle {
    /// Checks every cross-field shape invariant.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != BUNDLE_FORMAT_VERSION {
            return Err(CliError::Bundle(format!(
                "unsupported bundle format_version {} (expected {BUNDLE_FORMAT_VERSION})",
                self.format_version
            )));
        }
        self.config.validate()?;
        self.params.validate(&self.config)?;
        if self.preprocessor.n_outputs() != self.config.n_features {
            return Err(CliError::Bundle(format!(
                "preprocessor yields {} inputs, model expects {}",
                self.preprocessor.n_outputs(),
                self.config.n_features
            )));
        }
        if self.preprocessor.input_width != self.schema.columns.len()
            || self.preprocessor.target_column != self.schema.target
            || self.preprocessor.task != self.config.task
            || self.schema.task != self.config.task
        {
            return Err(CliError::Bundle("preprocessor, schema and model disagree".into()));
        }
        if let Some(index) = &self.index {
            index.validate()?;
            if index.embeddings.cols() != self.config.embedding_len() {
                return Err(CliError::Bundle(format!(
                    "embedding index width {} does not match model embedding length {}",
                    index.embeddings.cols(),
                    self.config.embedding_len()
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle fields serialize")
    }
}

/// Writes the bundle as pretty-printed JSON.
pub fn save_bundle(bundle: &ModelBundle, path: &Path) -> Result<()> {
    bundle.validate()?;
    let mut text = bundle.to_json();
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

/// Reads and validates a bundle.
pub fn load_bundle(path: &Path) -> Result<ModelBundle> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_bundle(&text, path)
}

/// Parses and validates bundle JSON; `path` only labels errors.
pub fn parse_bundle(text: &str, path: &Path) -> Result<ModelBundle> {
    let json_err = |source| CliError::Json {
        path: path.to_path_buf(),
        source,
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
    match value.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(BUNDLE_FORMAT_VERSION) => {}
        Some(v) => {
            return Err(CliError::Bundle(format!(
                "unsupported bundle format_version {v} (expected {BUNDLE_FORMAT_VERSION})"
            )))
        }
        None => return Err(CliError::Bundle("bundle has no format_version".into())),
    }
    let bundle: ModelBundle = serde_json::from_value(value).map_err(json_err)?;
    bundle.validate()?;
    Ok(bundle)
}
