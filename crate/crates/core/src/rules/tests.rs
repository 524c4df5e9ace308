use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::data::SampleDomain;
use crate::model::{forward, predict, Linear, Task};
use crate::numeric::{Matrix, SeededRng};
use crate::testutil::{random_params, tiny};

fn entry(layer: usize, feature: usize, lower: f64, upper: f64) -> RuleTraceEntry {
    RuleTraceEntry {
        layer,
        feature,
        bin: 0,
        tau: 0.0,
        lower,
        upper,
        redundant: false,
        absorbed_by: None,
    }
}

/// A point inside `b`: the midpoint, or one unit inside an unbounded side.
fn interior(b: &FeatureBounds, fallback: f64) -> f64 {
    match (b.lower.is_finite(), b.upper.is_finite()) {
        (true, true) => 0.5 * (b.lower + b.upper),
        (true, false) => b.lower + 1.0,
        (false, true) => b.upper - 1.0,
        (false, false) => fallback,
    }
}

#[test]
fn single_threshold_region() {
    let (p, cfg) = tiny();
    let (region, trace) = extract_region(&p, &cfg, &[0.5]).unwrap();
    assert_eq!(region.features[0].lower, -0.3);
    assert_eq!(region.features[0].upper, f64::INFINITY);
    assert_eq!(region.features[0].lower_rule, Some(0));
    assert_eq!(trace.entries.len(), 1);
    assert_eq!(trace.entries[0].bin, 1);
    assert!(!trace.entries[0].redundant);
}

#[test]
fn threshold_outside_the_interval_is_redundant() {
    // layer 1 threshold is -1.0, below the layer-0 bound -0.3
    let cfg = LeurnConfig::new(1, 1, 2, Task::Binary);
    let p = LeurnParams {
        tau0: vec![0.3],
        rule_layers: vec![Linear {
            weights: Matrix::zeros(1, 1),
            bias: vec![1.0],
        }],
        head: Linear {
            weights: Matrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap(),
            bias: vec![0.0],
        },
    };
    let (region, trace) = extract_region(&p, &cfg, &[0.5]).unwrap();
    let e = trace.entry(1, 0);
    assert_eq!((e.lower, e.upper), (-1.0, f64::INFINITY));
    assert!(e.redundant);
    assert_eq!(e.absorbed_by, Some(0));
    assert_eq!(region.features[0].lower, -0.3);
    assert_eq!(region.features[0].lower_rule, Some(0));
    let s = simplify(&trace, None).unwrap();
    assert_eq!(s.roles, vec![RuleRole::Bound, RuleRole::Absorbed { into: 0 }]);
}

#[test]
fn region_is_constant_under_monte_carlo() {
    let cfg = LeurnConfig::new(3, 2, 5, Task::Binary);
    let p = random_params(&cfg, 41);
    let probe = [0.2, -0.4, 0.7];
    let (region, _) = extract_region(&p, &cfg, &probe).unwrap();
    let reference = forward(&p, &cfg, &probe).unwrap();
    let mut rng = SeededRng::new(5);
    for _ in 0..1000 {
        let x: Vec<f64> = region
            .features
            .iter()
            .zip(&probe)
            .map(|(b, &c)| {
                let lo = b.lower.max(c - 5.0);
                let hi = b.upper.min(c + 5.0);
                lo + rng.random::<f64>() * (hi - lo)
            })
            .collect();
        assert!(region.contains(&x));
        let t = forward(&p, &cfg, &x).unwrap();
        assert_eq!(t.bins, reference.bins);
        assert_eq!(t.logits, reference.logits);
    }
}

#[test]
fn region_output_matches_probe_and_center() {
    for (seed, task) in [(1, Task::Binary), (2, Task::Multiclass { classes: 3 }), (3, Task::Regression)] {
        let cfg = LeurnConfig::new(3, 2, 4, task);
        let p = random_params(&cfg, seed);
        let probe = [0.1, 0.9, -1.3];
        let (region, _) = extract_region(&p, &cfg, &probe).unwrap();
        let out = region_output(&p, &cfg, &region).unwrap();
        assert_eq!(out, predict(&p, &cfg, &probe).unwrap());
        let center: Vec<f64> = region.features.iter().zip(&probe).map(|(b, &c)| interior(b, c)).collect();
        assert_eq!(out, predict(&p, &cfg, &center).unwrap());
    }
}

#[test]
fn region_output_rejects_foreign_regions() {
    let cfg = LeurnConfig::new(2, 1, 3, Task::Binary);
    let a = random_params(&cfg, 1);
    let b = random_params(&cfg, 2);
    let (region, _) = extract_region(&a, &cfg, &[0.0, 0.5]).unwrap();
    assert!(matches!(region_output(&b, &cfg, &region), Err(Error::Region(_))));
    let other = LeurnConfig::new(2, 2, 3, Task::Binary);
    assert!(region_output(&random_params(&other, 1), &other, &region).is_err());
    let mut bad = region.clone();
    bad.bins[0] = 7;
    assert!(region_output(&a, &cfg, &bad).is_err());
}

#[test]
fn surrogate_traces_have_no_regions() {
    let (p, cfg) = tiny();
    let t = crate::model::forward_with(&p, &cfg, &[0.5], crate::model::ForwardMode::Surrogate).unwrap();
    assert!(rule_trace(&t, 2).is_err());
}

#[test]
fn simplify_without_redundancy_is_identity() {
    let trace = RuleTrace {
        n_features: 2,
        depth: 1,
        entries: vec![
            entry(0, 0, -1.0, 1.0),
            entry(0, 1, 0.0, f64::INFINITY),
            entry(1, 0, -0.5, 2.0),
            entry(1, 1, f64::NEG_INFINITY, 3.0),
        ],
    };
    let s = simplify(&trace, None).unwrap();
    assert!(s.roles.iter().all(|r| *r == RuleRole::Bound));
    assert_eq!(s.rules().count(), 4);
    assert_eq!(s.trace, trace);
}

#[test]
fn nested_interval_is_absorbed() {
    let trace = RuleTrace {
        n_features: 1,
        depth: 1,
        entries: vec![entry(0, 0, -1.0, 1.0), entry(1, 0, -2.0, 2.0)],
    };
    let s = simplify(&trace, None).unwrap();
    assert_eq!(s.roles, vec![RuleRole::Bound, RuleRole::Absorbed { into: 0 }]);
    assert_eq!(s.rules().count(), 1);
    let b = &s.bounds()[0];
    assert_eq!((b.lower, b.upper), (-1.0, 1.0));
}

#[test]
fn absorption_goes_to_the_nearer_bound() {
    // current interval [-1, 0.5) defined by entries 0 (lower) and 1 (upper);
    // entry 2 = [-1.2, 2.0) is closer on the lower side
    let trace = RuleTrace {
        n_features: 1,
        depth: 2,
        entries: vec![entry(0, 0, -1.0, f64::INFINITY), entry(1, 0, f64::NEG_INFINITY, 0.5), entry(2, 0, -1.2, 2.0)],
    };
    let s = simplify(&trace, None).unwrap();
    assert_eq!(s.roles[2], RuleRole::Absorbed { into: 0 });
    let trace = RuleTrace {
        entries: vec![entry(0, 0, -1.0, f64::INFINITY), entry(1, 0, f64::NEG_INFINITY, 0.5), entry(2, 0, -3.0, 0.7)],
        ..trace
    };
    assert_eq!(simplify(&trace, None).unwrap().roles[2], RuleRole::Absorbed { into: 1 });
}

#[test]
fn rule_covering_the_data_range_is_category_bias() {
    let trace = RuleTrace {
        n_features: 2,
        depth: 0,
        entries: vec![entry(0, 0, -40.0, f64::INFINITY), entry(0, 1, -0.5, f64::INFINITY)],
    };
    let bounds = [(-2.0, 3.0), (-2.0, 3.0)];
    let s = simplify(&trace, Some(&bounds)).unwrap();
    assert_eq!(s.roles, vec![RuleRole::CategoryBias, RuleRole::Bound]);
    // category-bias rules stay in the presented list and keep their geometry
    assert_eq!(s.rules().count(), 2);
    assert_eq!(s.bounds()[0].lower, -40.0);
    assert!(simplify(&trace, Some(&bounds[..1])).is_err());
}

#[test]
fn generated_samples_stay_in_the_region() {
    let cfg = LeurnConfig::new(3, 2, 5, Task::Binary);
    let p = random_params(&cfg, 9);
    let probe = [0.3, -0.2, 0.1];
    let (region, _) = extract_region(&p, &cfg, &probe).unwrap();
    let domain: Vec<SampleDomain> = (0..3)
        .map(|c| SampleDomain::Continuous {
            column: c,
            min: -2.0,
            max: 2.0,
        })
        .collect();
    let want = predict(&p, &cfg, &probe).unwrap();
    let mut rng = SeededRng::new(3);
    for _ in 0..500 {
        let x = generate(&region, &domain, &mut rng).unwrap();
        assert!(x.iter().all(|v| (-2.0..=2.0).contains(v)));
        let (again, _) = extract_region(&p, &cfg, &x).unwrap();
        assert_eq!(again, region);
        assert_eq!(predict(&p, &cfg, &x).unwrap(), want);
    }
}

#[test]
fn generate_clips_to_data_bounds() {
    let (p, cfg) = tiny();
    // region [-0.3, inf) clipped to [-0.3, 1.0]
    let (region, _) = extract_region(&p, &cfg, &[0.5]).unwrap();
    let mut rng = SeededRng::new(1);
    let dom = |min, max| vec![SampleDomain::Continuous { column: 0, min, max }];
    for _ in 0..200 {
        let v = generate(&region, &dom(-1.0, 1.0), &mut rng).unwrap()[0];
        assert!((-0.3..=1.0).contains(&v));
    }
    // a region whose whole clipped range is the data maximum
    assert_eq!(generate(&region, &dom(-1.0, -0.3), &mut rng).unwrap(), vec![-0.3]);
    // data entirely below the region
    let err = generate(&region, &dom(-2.0, -1.0), &mut rng).unwrap_err();
    assert!(matches!(err, Error::Region(ref m) if m.contains("feature 0")));
}

#[test]
fn generate_picks_admissible_one_hot_levels() {
    // three one-hot columns; the region admits only the pattern (0, 1, 0)
    let bounds = |lower, upper| FeatureBounds {
        lower,
        upper,
        raw_lower: lower,
        raw_upper: upper,
        lower_rule: None,
        upper_rule: None,
    };
    let region = Region {
        n_features: 3,
        depth: 0,
        features: vec![bounds(-0.5, 0.5), bounds(0.5, f64::INFINITY), bounds(f64::NEG_INFINITY, 0.7)],
        bins: vec![0; 3],
        taus: vec![0.0; 3],
    };
    let domain = [SampleDomain::Categorical { start: 0, width: 3 }];
    let mut rng = SeededRng::new(2);
    for _ in 0..50 {
        assert_eq!(generate(&region, &domain, &mut rng).unwrap(), vec![0.0, 1.0, 0.0]);
    }
    let mut closed = region.clone();
    closed.features[1] = bounds(2.0, 3.0);
    assert!(generate(&closed, &domain, &mut rng).is_err());
}

#[test]
fn raw_units_follow_the_affine_map() {
    let (p, cfg) = tiny();
    let (mut region, _) = extract_region(&p, &cfg, &[0.5]).unwrap();
    region.set_units(&[(10.0, 2.0)]).unwrap();
    assert_eq!(region.features[0].raw_lower, 10.0 + 2.0 * -0.3);
    assert_eq!(region.features[0].raw_upper, f64::INFINITY);
    assert!(region.set_units(&[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_equivalence_and_soundness(
        seed in 0u64..1000,
        depth in 0usize..4,
        k in 2usize..8,
        x in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let cfg = LeurnConfig::new(3, depth, k, Task::Multiclass { classes: 3 });
        let p = random_params(&cfg, seed);
        let (region, trace) = extract_region(&p, &cfg, &x).unwrap();
        prop_assert!(region.contains(&x));
        let out = region_output(&p, &cfg, &region).unwrap();
        let direct = predict(&p, &cfg, &x).unwrap();
        for (a, b) in out.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        // simplification keeps the region, and agrees with extraction's flags
        let s = simplify(&trace, None).unwrap();
        prop_assert_eq!(s.bounds(), region.features.clone());
        for (e, r) in trace.entries.iter().zip(&s.roles) {
            match r {
                RuleRole::Absorbed { into } => prop_assert_eq!(e.absorbed_by, Some(*into)),
                _ => prop_assert!(!e.redundant),
            }
        }
        // appending a layer never widens an interval
        let n = cfg.n_features;
        let mut prev: Option<Vec<FeatureBounds>> = None;
        for layers in 1..=depth + 1 {
            let (b, _) = intersect(n, trace.entries[..layers * n].iter().enumerate().map(|(i, e)| (i, e.feature, e.lower, e.upper)));
            if let Some(prev) = &prev {
                for (new, old) in b.iter().zip(prev) {
                    prop_assert!(new.lower >= old.lower && new.upper <= old.upper);
                }
            }
            prev = Some(b);
        }
    }
}
