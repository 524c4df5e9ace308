//! Exact decision regions: the univariate tree path a sample takes.
//!
//! At layer `i` the quantizer puts feature `f` into bin `j`, which is the
//! input-space interval `[cut_{j-1} - tau_{i,f}, cut_j - tau_{i,f})`. Intersecting
//! these intervals over all layers gives the sample's region: every input in
//! it takes the same bins at every layer, so the network output is constant
//! there.

mod generate;
mod simplify;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::model::{output_activation, ForwardTrace, LeurnConfig, LeurnParams, QTanh};
use crate::numeric::{bound, math};

pub use generate::{generate, generate_raw};
pub use simplify::{simplify, RuleRole, SimplifiedTrace};

#[cfg(test)]
mod tests;

/// The bin one feature fell into at one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTraceEntry {
    pub layer: usize,
    pub feature: usize,
    pub bin: usize,
    /// Threshold `tau_{i,f}` of this layer and feature.
    pub tau: f64,
    /// Lower bound of the bin in standardized input units (inclusive).
    #[serde(with = "bound::lower")]
    pub lower: f64,
    /// Upper bound of the bin in standardized input units (exclusive).
    #[serde(with = "bound::upper")]
    pub upper: f64,
    /// The interval already established by earlier layers lies inside this one.
    pub redundant: bool,
    /// For a redundant entry, the index of the earlier entry defining the
    /// nearer of the bounds that make it redundant.
    pub absorbed_by: Option<usize>,
}

impl RuleTraceEntry {
    /// Whether `x` satisfies this rule.
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x < self.upper
    }
}

/// Every layer's bin choice for one sample, layer-major (`layer * n + feature`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTrace {
    pub n_features: usize,
    pub depth: usize,
    pub entries: Vec<RuleTraceEntry>,
}

impl RuleTrace {
    pub fn index(&self, layer: usize, feature: usize) -> usize {
        layer * self.n_features + feature
    }

    pub fn entry(&self, layer: usize, feature: usize) -> &RuleTraceEntry {
        &self.entries[self.index(layer, feature)]
    }
}

/// The interval of one feature inside a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBounds {
    /// Inclusive lower bound, standardized units.
    #[serde(with = "bound::lower")]
    pub lower: f64,
    /// Exclusive upper bound, standardized units.
    #[serde(with = "bound::upper")]
    pub upper: f64,
    #[serde(with = "bound::lower")]
    pub raw_lower: f64,
    #[serde(with = "bound::upper")]
    pub raw_upper: f64,
    /// Trace entry defining each bound, if the bound is finite.
    pub lower_rule: Option<usize>,
    pub upper_rule: Option<usize>,
}

impl FeatureBounds {
    fn unbounded() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            raw_lower: f64::NEG_INFINITY,
            raw_upper: f64::INFINITY,
            lower_rule: None,
            upper_rule: None,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x < self.upper
    }
}

/// A decision region: per-feature intervals plus the bin path that defines it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub n_features: usize,
    pub depth: usize,
    pub features: Vec<FeatureBounds>,
    /// Bin index of every (layer, feature), layer-major.
    pub bins: Vec<usize>,
    /// Thresholds along the path, layer-major.
    pub taus: Vec<f64>,
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n_features && self.features.iter().zip(x).all(|(b, &v)| b.contains(v))
    }

    /// Fills the raw-unit bounds from per-input `(mean, std)` pairs, `raw = mean + std * z`.
    pub fn set_units(&mut self, affines: &[(f64, f64)]) -> Result<()> {
        if affines.len() != self.n_features {
            return Err(shape_err!("{} unit maps for {} features", affines.len(), self.n_features));
        }
        for (b, &(m, s)) in self.features.iter_mut().zip(affines) {
            b.raw_lower = m + s * b.lower;
            b.raw_upper = m + s * b.upper;
        }
        Ok(())
    }
}

/// Running per-feature intersection used while walking a trace.
struct Intersection {
    bounds: Vec<FeatureBounds>,
}

impl Intersection {
    fn new(n: usize) -> Self {
        Self {
            bounds: vec![FeatureBounds::unbounded(); n],
        }
    }

    /// Narrows feature `f` by `[lo, hi)` from trace entry `idx`.
    fn narrow(&mut self, f: usize, lo: f64, hi: f64, idx: usize) -> Narrowed {
        let b = &mut self.bounds[f];
        let tighter_lo = lo > b.lower;
        let tighter_hi = hi < b.upper;
        if tighter_lo {
            b.lower = lo;
            b.raw_lower = lo;
            b.lower_rule = Some(idx);
        }
        if tighter_hi {
            b.upper = hi;
            b.raw_upper = hi;
            b.upper_rule = Some(idx);
        }
        if tighter_lo || tighter_hi {
            return Narrowed::Tightened;
        }
        // Redundant: both finite sides lie outside the current interval. The
        // absorbing rule is the one defining the nearer current bound.
        let below = lo.is_finite().then(|| (b.lower - lo, b.lower_rule));
        let above = hi.is_finite().then(|| (hi - b.upper, b.upper_rule));
        Narrowed::Redundant(match (below, above) {
            (Some((gl, rl)), Some((gh, rh))) => {
                if gl <= gh {
                    rl
                } else {
                    rh
                }
            }
            (Some((_, r)), None) | (None, Some((_, r))) => r,
            (None, None) => None,
        })
    }
}

enum Narrowed {
    Tightened,
    /// No new constraint; carries the absorbing entry.
    Redundant(Option<usize>),
}

/// Walks `(feature, lower, upper)` intervals in trace order, returning the
/// final bounds and, per interval, the absorbing entry if it was redundant.
fn intersect(n: usize, intervals: impl Iterator<Item = (usize, usize, f64, f64)>) -> (Vec<FeatureBounds>, Vec<Option<Option<usize>>>) {
    let mut acc = Intersection::new(n);
    let mut marks = Vec::new();
    for (idx, f, lo, hi) in intervals {
        marks.push(match acc.narrow(f, lo, hi, idx) {
            Narrowed::Tightened => None,
            Narrowed::Redundant(by) => Some(by),
        });
    }
    (acc.bounds, marks)
}

/// Rule trace and region of an eval-mode forward trace.
pub fn rule_trace(trace: &ForwardTrace, regions: usize) -> Result<(Region, RuleTrace)> {
    if !trace.quantized {
        return Err(Error::Region("rules need a quantized trace, not a surrogate one".into()));
    }
    let q = QTanh::new(regions)?;
    let n = trace.n_features;
    let d = trace.depth;
    let mut entries = Vec::with_capacity((d + 1) * n);
    for i in 0..=d {
        for f in 0..n {
            let at = i * n + f;
            let (clo, chi) = q.bin_interval(trace.bins[at]);
            entries.push(RuleTraceEntry {
                layer: i,
                feature: f,
                bin: trace.bins[at],
                tau: trace.tau[at],
                lower: clo - trace.tau[at],
                upper: chi - trace.tau[at],
                redundant: false,
                absorbed_by: None,
            });
        }
    }
    let (features, marks) = intersect(n, entries.iter().enumerate().map(|(i, e)| (i, e.feature, e.lower, e.upper)));
    for (e, mark) in entries.iter_mut().zip(marks) {
        if let Some(by) = mark {
            e.redundant = true;
            e.absorbed_by = by;
        }
    }
    let region = Region {
        n_features: n,
        depth: d,
        features,
        bins: trace.bins.clone(),
        taus: trace.tau.clone(),
    };
    Ok((region, RuleTrace { n_features: n, depth: d, entries }))
}

/// The region of `x_std` and its full rule trace.
pub fn extract_region(params: &LeurnParams, cfg: &LeurnConfig, x_std: &[f64]) -> Result<(Region, RuleTrace)> {
    let trace = crate::model::forward(params, cfg, x_std)?;
    rule_trace(&trace, cfg.regions)
}

/// Model output on a region, recomputed from its bin path alone.
///
/// Each layer's embedding is rebuilt as `midpoint(bin) * tanh(tau)` and fed
/// through the linear layers; no input point is involved. The recomputed
/// thresholds must reproduce the region's recorded ones, otherwise the region
/// came from different parameters.
pub fn region_output(params: &LeurnParams, cfg: &LeurnConfig, region: &Region) -> Result<Vec<f64>> {
    params.validate(cfg)?;
    let n = cfg.n_features;
    let d = cfg.depth;
    let total = (d + 1) * n;
    if region.n_features != n || region.depth != d || region.bins.len() != total || region.taus.len() != total {
        return Err(Error::Region(format!(
            "region has {} features and depth {}, model has {} and {}",
            region.n_features, region.depth, n, d
        )));
    }
    let q = QTanh::new(cfg.regions)?;
    if let Some(&b) = region.bins.iter().find(|&&b| b >= q.levels()) {
        return Err(Error::Region(format!("bin index {b} out of range for k = {}", q.levels())));
    }
    let mut tau = vec![0.0; total];
    let mut embedding = vec![0.0; total];
    tau[..n].copy_from_slice(&params.tau0);
    for i in 0..=d {
        for f in 0..n {
            let at = i * n + f;
            let recorded = region.taus[at];
            if (tau[at] - recorded).abs() > 1e-9 * (1.0 + recorded.abs()) {
                return Err(Error::Region(format!(
                    "layer {i} feature {f}: threshold {} does not match the region's {recorded}",
                    tau[at]
                )));
            }
            embedding[at] = q.midpoint(region.bins[at]) * math::tanh(tau[at]);
        }
        let width = (i + 1) * n;
        if i < d {
            let (_, next) = tau.split_at_mut(width);
            params.rule_layers[i].apply_into(&embedding[..width], &mut next[..n]);
        } else {
            let mut logits = vec![0.0; cfg.output_dim()];
            params.head.apply_into(&embedding, &mut logits);
            return Ok(output_activation(cfg.task, &logits));
        }
    }
    unreachable!("loop returns at the head layer")
}
