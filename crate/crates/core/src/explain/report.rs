use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{contributions, merge_redundant, Target};
use crate::data::{Cell, ColumnRole, FeatureEncoder, Preprocessor};
use crate::error::{shape_err, Result};
use crate::model::{forward, output_activation, LeurnConfig, LeurnParams, Task};
use crate::numeric::bound;
use crate::rules::{simplify, RuleRole};
use crate::train::argmax;

/// How model inputs map back to named raw features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureUnits {
    pub names: Vec<String>,
    /// `(mean, std)` with `raw = mean + std * standardized`.
    pub affines: Vec<(f64, f64)>,
    /// Training min/max per input in standardized units, for category-bias detection.
    pub bounds: Option<Vec<(f64, f64)>>,
    /// `(feature, level)` for one-hot inputs.
    pub one_hot: Vec<Option<(String, String)>>,
}

impl FeatureUnits {
    /// Inputs named `x0, x1, ...` reported in standardized units.
    pub fn standardized(n: usize) -> Self {
        Self {
            names: (0..n).map(|i| format!("x{i}")).collect(),
            affines: alloc::vec![(0.0, 1.0); n],
            bounds: None,
            one_hot: alloc::vec![None; n],
        }
    }

    pub fn from_preprocessor(pre: &Preprocessor) -> Self {
        let one_hot = pre
            .roles()
            .into_iter()
            .map(|role| match role {
                ColumnRole::OneHot { encoder, level } => match &pre.encoders[encoder] {
                    FeatureEncoder::Categorical { name, levels, .. } => Some((name.clone(), levels[level].clone())),
                    FeatureEncoder::Continuous { .. } => None,
                },
                ColumnRole::Continuous { .. } => None,
            })
            .collect();
        Self {
            names: pre.output_names(),
            affines: pre.affines(),
            bounds: Some(pre.bounds_std()),
            one_hot,
        }
    }

    fn len(&self) -> usize {
        self.names.len()
    }
}

/// One surviving rule of the explained sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRule {
    /// Index in the rule trace (`layer * n_features + feature`).
    pub index: usize,
    pub layer: usize,
    pub feature: usize,
    pub name: String,
    /// Human-readable rule in raw units.
    pub text: String,
    #[serde(with = "bound::lower")]
    pub lower: f64,
    #[serde(with = "bound::upper")]
    pub upper: f64,
    #[serde(with = "bound::lower")]
    pub raw_lower: f64,
    #[serde(with = "bound::upper")]
    pub raw_upper: f64,
    pub category_bias: bool,
    /// Score contribution including absorbed rules and the bias share.
    pub contribution: f64,
    pub bias_share: f64,
}

/// How earlier rules set one derived threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdProvenance {
    pub layer: usize,
    pub feature: usize,
    pub name: String,
    pub tau: f64,
    /// `(rule index, contribution including bias share)` per surviving source rule.
    pub sources: Vec<(usize, f64)>,
}

/// Explanation of one prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationReport {
    pub prediction: Vec<f64>,
    /// Head output the contributions explain.
    pub output: usize,
    pub logit: f64,
    pub convention: String,
    /// Surviving rules, ordered by layer then feature.
    pub rules: Vec<ReportRule>,
    pub provenance: Vec<ThresholdProvenance>,
    /// Sum of the rules' contributions; equals `logit`.
    pub total: f64,
}

impl ExplanationReport {
    /// Three-section text: layer-0 rules, derived rules with threshold
    /// provenance, and score contributions.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let pred: Vec<String> = self.prediction.iter().map(|p| format!("{p:.6}")).collect();
        let _ = writeln!(out, "prediction: [{}]  logit[{}] = {:+.6}", pred.join(", "), self.output, self.logit);
        let _ = writeln!(out, "convention: {}", self.convention);
        let line = |r: &ReportRule| format!("{}  [contribution {:+.6}]", r.text, r.contribution);
        let _ = writeln!(out, "\nlayer 0 rules:");
        for r in self.rules.iter().filter(|r| r.layer == 0 && !r.category_bias) {
            let _ = writeln!(out, "  {}", line(r));
        }
        let _ = writeln!(out, "\nderived rules:");
        for r in self.rules.iter().filter(|r| r.layer > 0 && !r.category_bias) {
            let _ = writeln!(out, "  layer {}: {}", r.layer, line(r));
            if let Some(p) = self.provenance.iter().find(|p| p.layer == r.layer && p.feature == r.feature) {
                let parts: Vec<String> = p
                    .sources
                    .iter()
                    .map(|(i, v)| format!("{} {v:+.6}", self.rule_text(*i)))
                    .collect();
                let _ = writeln!(out, "    threshold {:+.6} from: {}", p.tau, parts.join("; "));
            }
        }
        if self.rules.iter().any(|r| r.category_bias) {
            let _ = writeln!(out, "\ncategory bias (rules holding over the whole training range):");
            for r in self.rules.iter().filter(|r| r.category_bias) {
                let _ = writeln!(out, "  layer {}: {}", r.layer, line(r));
            }
        }
        let _ = writeln!(out, "\nscore contributions:");
        let mut ranked: Vec<&ReportRule> = self.rules.iter().collect();
        ranked.sort_by(|a, b| b.contribution.abs().total_cmp(&a.contribution.abs()).then(a.index.cmp(&b.index)));
        for r in ranked {
            let _ = writeln!(out, "  {}", line(r));
        }
        let _ = writeln!(out, "  total {:+.6} = logit {:+.6}", self.total, self.logit);
        out
    }

    fn rule_text(&self, index: usize) -> String {
        self.rules
            .iter()
            .find(|r| r.index == index)
            .map_or_else(|| format!("rule {index}"), |r| r.text.clone())
    }
}

fn render(units: &FeatureUnits, f: usize, lo: f64, hi: f64, raw_lo: f64, raw_hi: f64) -> String {
    if let Some((feature, level)) = &units.one_hot[f] {
        let has = |v: f64| lo <= v && v < hi;
        return match (has(0.0), has(1.0)) {
            (false, true) => format!("{feature} = {level}"),
            (true, false) => format!("{feature} != {level}"),
            _ => format!("{feature}: any level ({level} unconstrained)"),
        };
    }
    let num = |v: f64| {
        if v.is_finite() {
            format!("{v:.4}")
        } else if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    };
    format!("{}: {} <= x < {}", units.names[f], num(raw_lo), num(raw_hi))
}

/// Explains the prediction for a standardized input.
pub fn report_std(params: &LeurnParams, cfg: &LeurnConfig, x_std: &[f64], units: &FeatureUnits) -> Result<ExplanationReport> {
    let n = cfg.n_features;
    if units.len() != n || units.affines.len() != n || units.one_hot.len() != n {
        return Err(shape_err!("unit description covers {} inputs, model has {n}", units.len()));
    }
    let trace = forward(params, cfg, x_std)?;
    let attr = contributions(params, cfg, &trace)?;
    let rules = simplify(&attr.rules.trace, units.bounds.as_deref())?;
    let merged = merge_redundant(&attr, &rules)?;
    let output = match cfg.task {
        Task::Multiclass { .. } => argmax(&trace.logits),
        _ => 0,
    };
    let score = merged.by_source(Target::Score { output });
    let share: Vec<f64> = {
        let mut s = alloc::vec![0.0; score.len()];
        for b in merged.bias_shares.iter().filter(|b| b.target == Target::Score { output }) {
            s[b.source] += b.value;
        }
        s
    };
    let mut out_rules = Vec::new();
    for (i, e, role) in rules.rules() {
        let (m, s) = units.affines[e.feature];
        let (raw_lo, raw_hi) = (m + s * e.lower, m + s * e.upper);
        out_rules.push(ReportRule {
            index: i,
            layer: e.layer,
            feature: e.feature,
            name: units.names[e.feature].clone(),
            text: render(units, e.feature, e.lower, e.upper, raw_lo, raw_hi),
            lower: e.lower,
            upper: e.upper,
            raw_lower: raw_lo,
            raw_upper: raw_hi,
            category_bias: role == RuleRole::CategoryBias,
            contribution: score[i],
            bias_share: share[i],
        });
    }
    let mut provenance = Vec::new();
    for layer in 1..=cfg.depth {
        for f in 0..n {
            let target = Target::Threshold { layer, feature: f };
            let by = merged.by_source(target);
            provenance.push(ThresholdProvenance {
                layer,
                feature: f,
                name: units.names[f].clone(),
                tau: merged.target_value(target),
                sources: rules.rules().filter(|(i, _, _)| *i < layer * n).map(|(i, _, _)| (i, by[i])).collect(),
            });
        }
    }
    let total = out_rules.iter().map(|r| r.contribution).sum();
    let convention = match cfg.task {
        Task::Binary => "contributions add up to the logit of the positive class (index 1); positive values favour it",
        Task::Multiclass { .. } => "contributions add up to the logit of the predicted class",
        Task::Regression => "contributions add up to the predicted target value",
    };
    Ok(ExplanationReport {
        prediction: output_activation(cfg.task, &trace.logits),
        output,
        logit: trace.logits[output],
        convention: convention.into(),
        rules: out_rules,
        provenance,
        total,
    })
}

/// Explains the prediction for a raw table row.
pub fn report(params: &LeurnParams, cfg: &LeurnConfig, row: &[Cell], pre: &Preprocessor) -> Result<ExplanationReport> {
    let (x, _) = pre.transform_row(row)?;
    report_std(params, cfg, &x, &FeatureUnits::from_preprocessor(pre))
}
