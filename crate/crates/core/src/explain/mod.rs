//! Additive explanations.
//!
//! Every threshold `tau_{i+1,f}` and every logit is an affine function of the
//! embeddings before it, so each (rule, response) pair contributes exactly
//! `weight * embedding` to it. Biases are shared equally among the
//! non-redundant rules feeding a target, and redundant rules hand their
//! contributions to the rule that makes them redundant.

mod contrib;
mod importance;
mod report;

pub use contrib::{contributions, merge_redundant, Attribution, BiasShare, Contribution, Target};
pub use importance::{feature_importance, feature_selection, ImportanceTable};
pub use report::{report, report_std, ExplanationReport, FeatureUnits, ReportRule, ThresholdProvenance};
