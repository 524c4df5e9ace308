//! Standard-library companion to `leurn-core`: CSV ingestion, JSON model
//! bundles, a rayon executor for the hyperparameter search, and the `leurn`
//! command line.

pub mod bundle;
pub mod cli;
pub mod error;
pub mod exec;
pub mod io;

pub use bundle::{load_bundle, parse_bundle, save_bundle, ModelBundle, Provenance, BUNDLE_FORMAT_VERSION};
pub use error::{CliError, Result};
pub use exec::Rayon;
pub use leurn_core as core;
