use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::Region;
use crate::data::{Cell, Preprocessor, SampleDomain};
use crate::error::{Error, Result};

/// Draws a model input uniformly from `region`, clipped to the training domain.
///
/// Continuous features are sampled on `[max(lower, min), min(upper, max))`;
/// when the data maximum lies inside the region the upper end is the closed
/// data bound, so a region touching a training extreme can still be sampled.
/// One-hot blocks take a level uniformly among those whose indicator pattern
/// the region admits.
pub fn generate<R: Rng + ?Sized>(region: &Region, domain: &[SampleDomain], rng: &mut R) -> Result<Vec<f64>> {
    let mut x = vec![0.0; region.n_features];
    for group in domain {
        match *group {
            SampleDomain::Continuous { column, min, max } => {
                let b = region
                    .features
                    .get(column)
                    .ok_or_else(|| Error::Region(format!("domain column {column} outside the region")))?;
                let lo = b.lower.max(min);
                x[column] = if b.upper > max {
                    // closed upper end at the data maximum
                    if lo > max {
                        return Err(empty(column, b.lower, b.upper, min, max));
                    }
                    let v = lo + rng.random::<f64>() * (max - lo);
                    v.min(max)
                } else {
                    if !(lo < b.upper) {
                        return Err(empty(column, b.lower, b.upper, min, max));
                    }
                    let v = lo + rng.random::<f64>() * (b.upper - lo);
                    if v < b.upper {
                        v
                    } else {
                        lo
                    }
                };
            }
            SampleDomain::Categorical { start, width } => {
                if start + width > region.n_features {
                    return Err(Error::Region(format!("one-hot block at {start} outside the region")));
                }
                let admits = |hot: usize| {
                    (0..width).all(|c| region.features[start + c].contains(if c == hot { 1.0 } else { 0.0 }))
                };
                let levels: Vec<usize> = (0..width).filter(|&h| admits(h)).collect();
                if levels.is_empty() {
                    return Err(Error::Region(format!(
                        "no level of the one-hot block at column {start} lies in the region"
                    )));
                }
                let hot = levels[rng.random_range(0..levels.len())];
                x[start + hot] = 1.0;
            }
        }
    }
    Ok(x)
}

fn empty(column: usize, lower: f64, upper: f64, min: f64, max: f64) -> Error {
    Error::Region(format!(
        "feature {column}: region [{lower}, {upper}) does not meet the training range [{min}, {max}]"
    ))
}

/// [`generate`] followed by decoding to a raw table row.
pub fn generate_raw<R: Rng + ?Sized>(region: &Region, pre: &Preprocessor, rng: &mut R) -> Result<Vec<Cell>> {
    let x = generate(region, &pre.sample_domain(), rng)?;
    pre.decode_row(&x)
}
