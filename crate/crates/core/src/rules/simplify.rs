use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{intersect, FeatureBounds, RuleTrace, RuleTraceEntry};
use crate::error::{shape_err, Result};

/// How a trace entry is presented after simplification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum RuleRole {
    /// A rule that constrains the region.
    Bound,
    /// Adds no constraint beyond earlier rules; its contributions belong to
    /// the entry `into`, which defines the nearer enclosing bound.
    Absorbed { into: usize },
    /// Holds for every training value of the feature, so it only shifts the
    /// score like a bias term.
    CategoryBias,
}

/// A rule trace with redundant entries identified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplifiedTrace {
    pub trace: RuleTrace,
    pub roles: Vec<RuleRole>,
}

impl SimplifiedTrace {
    /// Entries that remain in the presented rule list, with their indices.
    pub fn rules(&self) -> impl Iterator<Item = (usize, &RuleTraceEntry, RuleRole)> + '_ {
        self.trace
            .entries
            .iter()
            .zip(&self.roles)
            .enumerate()
            .filter(|(_, (_, r))| !matches!(r, RuleRole::Absorbed { .. }))
            .map(|(i, (e, &r))| (i, e, r))
    }

    /// Per-feature intervals rebuilt from the surviving entries only.
    pub fn bounds(&self) -> Vec<FeatureBounds> {
        intersect(self.trace.n_features, self.rules().map(|(i, e, _)| (i, e.feature, e.lower, e.upper))).0
    }

    pub fn role(&self, index: usize) -> RuleRole {
        self.roles[index]
    }
}

/// Marks redundant entries and, given training bounds per feature in
/// standardized units, rules that hold over the whole training range.
///
/// Walking the entries in order, one whose interval contains the interval
/// established so far is absorbed into the entry defining the nearer of the
/// enclosing bounds. A surviving entry whose interval covers `[min, max]` of
/// its feature is a category bias.
pub fn simplify(trace: &RuleTrace, data_bounds: Option<&[(f64, f64)]>) -> Result<SimplifiedTrace> {
    if let Some(b) = data_bounds {
        if b.len() != trace.n_features {
            return Err(shape_err!("{} data bounds for {} features", b.len(), trace.n_features));
        }
    }
    let (_, marks) = intersect(
        trace.n_features,
        trace.entries.iter().enumerate().map(|(i, e)| (i, e.feature, e.lower, e.upper)),
    );
    let roles = trace
        .entries
        .iter()
        .zip(marks)
        .map(|(e, mark)| match mark {
            Some(Some(into)) => RuleRole::Absorbed { into },
            _ => match data_bounds {
                Some(b) if e.lower <= b[e.feature].0 && e.upper > b[e.feature].1 => RuleRole::CategoryBias,
                _ => RuleRole::Bound,
            },
        })
        .collect();
    Ok(SimplifiedTrace {
        trace: trace.clone(),
        roles,
    })
}
