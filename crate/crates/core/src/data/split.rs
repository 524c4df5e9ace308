use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{math, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

/// Train/validation/test fractions; must sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.65,
            val: 0.15,
            test: 0.20,
        }
    }
}

impl SplitRatios {
    /// Same train:val proportion with no test share.
    pub fn without_test(self) -> Self {
        let tv = self.train + self.val;
        Self {
            train: self.train / tv,
            val: self.val / tv,
            test: 0.0,
        }
    }

    fn as_array(self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }

    fn validate(self) -> Result<()> {
        let r = self.as_array();
        if r.iter().any(|v| !(*v >= 0.0)) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split ratios must be non-negative and sum to 1, got {r:?}"
            )));
        }
        if self.train <= 0.0 {
            return Err(Error::Config("train ratio must be positive".into()));
        }
        Ok(())
    }
}

const TAGS: [SplitTag; 3] = [SplitTag::Train, SplitTag::Val, SplitTag::Test];

/// Largest-remainder apportionment of `n` items.
fn apportion(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact = ratios.map(|r| r * n as f64);
    let mut counts = exact.map(|e| math::floor(e + 1e-9) as usize);
    let mut left = n.saturating_sub(counts.iter().sum());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let fa = exact[a] - counts[a] as f64;
        let fb = exact[b] - counts[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if ratios[i] > 0.0 {
            counts[i] += 1;
            left -= 1;
        }
    }
    counts
}

/// Seeded shuffle-and-partition of `n` rows.
///
/// With `strata` (one class label per row) each class is partitioned
/// separately, so every split keeps the class proportions; a class missing
/// from a split with a positive ratio is an error.
pub fn split(n: usize, ratios: SplitRatios, seed: u64, strata: Option<&[usize]>) -> Result<Vec<SplitTag>> {
    ratios.validate()?;
    let parts = ratios.as_array().iter().filter(|r| **r > 0.0).count();
    if n < parts {
        return Err(Error::Data(format!("cannot split {n} rows into {parts} parts")));
    }
    let mut rng = SeededRng::new(seed);
    let mut tags = vec![SplitTag::Train; n];
    let groups: Vec<Vec<usize>> = match strata {
        None => vec![(0..n).collect()],
        Some(labels) => {
            if labels.len() != n {
                return Err(Error::Shape(format!("{} strata labels for {n} rows", labels.len())));
            }
            let classes = labels.iter().max().map_or(0, |m| m + 1);
            let mut groups = vec![Vec::new(); classes];
            for (i, &l) in labels.iter().enumerate() {
                groups[l].push(i);
            }
            groups.retain(|g| !g.is_empty());
            groups
        }
    };
    for (g, mut rows) in groups.into_iter().enumerate() {
        rows.shuffle(&mut rng);
        let counts = apportion(rows.len(), ratios.as_array());
        if strata.is_some() {
            for (i, c) in counts.iter().enumerate() {
                if *c == 0 && ratios.as_array()[i] > 0.0 {
                    return Err(Error::Data(format!(
                        "class group {g} has no rows in the {:?} split",
                        TAGS[i]
                    )));
                }
            }
        }
        let mut at = 0;
        for (tag, count) in TAGS.iter().zip(counts) {
            for &r in &rows[at..at + count] {
                tags[r] = *tag;
            }
            at += count;
        }
    }
    Ok(tags)
}
