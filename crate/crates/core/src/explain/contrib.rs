use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::model::{ForwardTrace, LeurnConfig, LeurnParams};
use crate::rules::{rule_trace, simplify, RuleRole, SimplifiedTrace};

/// What a contribution feeds into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// Threshold `tau_{layer, feature}` for `layer >= 1`.
    Threshold { layer: usize, feature: usize },
    /// Logit `output` of the head.
    Score { output: usize },
}

/// `weight * embedding` from one rule to one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    /// Embedding index of the source rule (`layer * n_features + feature`).
    pub source: usize,
    pub layer: usize,
    pub feature: usize,
    pub target: Target,
    pub value: f64,
}

/// The part of a target's bias assigned to one source rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasShare {
    pub source: usize,
    pub target: Target,
    pub value: f64,
}

/// All contributions of one sample, with the rule simplification used to
/// choose bias recipients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub n_features: usize,
    pub depth: usize,
    pub contributions: Vec<Contribution>,
    pub bias_shares: Vec<BiasShare>,
    pub rules: SimplifiedTrace,
    /// Thresholds of the sample, layer-major.
    pub taus: Vec<f64>,
    pub logits: Vec<f64>,
}

impl Attribution {
    /// Sum of contributions and bias shares reaching `target`.
    pub fn target_total(&self, target: Target) -> f64 {
        let c: f64 = self.contributions.iter().filter(|c| c.target == target).map(|c| c.value).sum();
        let b: f64 = self.bias_shares.iter().filter(|b| b.target == target).map(|b| b.value).sum();
        c + b
    }

    /// The exact value of `target` from the forward pass.
    pub fn target_value(&self, target: Target) -> f64 {
        match target {
            Target::Threshold { layer, feature } => self.taus[layer * self.n_features + feature],
            Target::Score { output } => self.logits[output],
        }
    }

    /// Per source rule, its contribution plus bias share to `target`.
    pub fn by_source(&self, target: Target) -> Vec<f64> {
        let mut out = alloc::vec![0.0; (self.depth + 1) * self.n_features];
        for c in self.contributions.iter().filter(|c| c.target == target) {
            out[c.source] += c.value;
        }
        for b in self.bias_shares.iter().filter(|b| b.target == target) {
            out[b.source] += b.value;
        }
        out
    }
}

/// Decomposes every threshold and logit of an eval-mode trace.
pub fn contributions(params: &LeurnParams, cfg: &LeurnConfig, trace: &ForwardTrace) -> Result<Attribution> {
    params.validate(cfg)?;
    let n = cfg.n_features;
    let d = cfg.depth;
    if trace.n_features != n || trace.depth != d {
        return Err(shape_err!(
            "trace ({} features, depth {}) does not match model ({n} features, depth {d})",
            trace.n_features,
            trace.depth
        ));
    }
    if !trace.masks.is_empty() {
        return Err(Error::Config("explanations need an eval-mode trace".into()));
    }
    let (_, rt) = rule_trace(trace, cfg.regions)?;
    let rules = simplify(&rt, None)?;
    let recipient = |a: usize| !matches!(rules.roles[a], RuleRole::Absorbed { .. });

    let mut contribs = Vec::new();
    let mut shares = Vec::new();
    for layer in 0..=d {
        let width = (layer + 1) * n;
        let lin = if layer < d { &params.rule_layers[layer] } else { &params.head };
        let recipients: Vec<usize> = (0..width).filter(|&a| recipient(a)).collect();
        for (t, &bias) in lin.bias.iter().enumerate() {
            let target = if layer < d {
                Target::Threshold { layer: layer + 1, feature: t }
            } else {
                Target::Score { output: t }
            };
            for a in 0..width {
                contribs.push(Contribution {
                    source: a,
                    layer: a / n,
                    feature: a % n,
                    target,
                    value: lin.weights.get(a, t) * trace.embedding[a],
                });
            }
            // layer-0 rules always constrain, so there is at least one recipient
            let share = bias / recipients.len() as f64;
            shares.extend(recipients.iter().map(|&a| BiasShare {
                source: a,
                target,
                value: share,
            }));
        }
    }
    Ok(Attribution {
        n_features: n,
        depth: d,
        contributions: contribs,
        bias_shares: shares,
        rules,
        taus: trace.tau.clone(),
        logits: trace.logits.clone(),
    })
}

/// Moves each redundant rule's contributions onto the rule absorbing it.
///
/// Absorption chains are followed to a surviving rule. Bias shares are
/// unchanged, since redundant rules never receive any.
pub fn merge_redundant(attr: &Attribution, rules: &SimplifiedTrace) -> Result<Attribution> {
    let len = rules.roles.len();
    let resolve = |mut a: usize| -> Result<usize> {
        for _ in 0..=len {
            match rules.roles.get(a) {
                Some(RuleRole::Absorbed { into }) => a = *into,
                Some(_) => return Ok(a),
                None => break,
            }
        }
        Err(Error::Region(format!("absorption of rule {a} does not end at a surviving rule")))
    };
    let mut merged: Vec<Contribution> = Vec::with_capacity(attr.contributions.len());
    let mut slot: BTreeMap<(Target, usize), usize> = BTreeMap::new();
    // surviving rules first, so absorbed values land on existing entries
    for c in attr.contributions.iter().filter(|c| resolve(c.source).ok() == Some(c.source)) {
        slot.insert((c.target, c.source), merged.len());
        merged.push(c.clone());
    }
    for c in &attr.contributions {
        let to = resolve(c.source)?;
        if to == c.source {
            continue;
        }
        let &i = slot
            .get(&(c.target, to))
            .ok_or_else(|| Error::Region(format!("rule {to} absorbing rule {} does not feed its target", c.source)))?;
        merged[i].value += c.value;
    }
    Ok(Attribution {
        contributions: merged,
        rules: rules.clone(),
        ..attr.clone()
    })
}
