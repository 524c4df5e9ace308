use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::numeric::{math, Matrix, SeededRng};

/// Parameters of the two-moons toy set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfMoonSpec {
    pub n: usize,
    /// Standard deviation of the Gaussian jitter added to both coordinates.
    pub noise: f64,
    /// Rotation about the origin, in degrees.
    pub rotation_deg: f64,
    /// Extra columns of `U(-1, 1)` noise appended after the two coordinates.
    pub noise_features: usize,
    pub seed: u64,
}

impl HalfMoonSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            noise: 0.1,
            rotation_deg: 0.0,
            noise_features: 0,
            seed,
        }
    }
}

/// Rotates the first two columns of every row by `degrees` about the origin.
pub fn rotate(x: &mut Matrix, degrees: f64) {
    let rad = degrees.to_radians();
    let (s, c) = (math::sin(rad), math::cos(rad));
    for r in 0..x.rows() {
        let row = x.row_mut(r);
        let (a, b) = (row[0], row[1]);
        row[0] = c * a - s * b;
        row[1] = s * a + c * b;
    }
}

/// Two interleaved half circles: class 0 on the upper unit half circle, class 1
/// on the lower half circle shifted to `(1, 0.5)`. Points are evenly spaced in
/// angle, jittered, optionally rotated, then shuffled.
pub fn half_moon(spec: HalfMoonSpec) -> Result<Dataset> {
    if spec.n < 2 {
        return Err(Error::Config("half moon needs at least 2 points".into()));
    }
    let mut rng = SeededRng::new(spec.seed);
    let jitter = Normal::new(0.0, spec.noise.max(0.0)).map_err(|_| Error::Config("noise must be finite".into()))?;
    let outer = spec.n / 2;
    let inner = spec.n - outer;
    let width = 2 + spec.noise_features;

    let angle = |i: usize, count: usize| {
        if count > 1 {
            core::f64::consts::PI * i as f64 / (count - 1) as f64
        } else {
            0.0
        }
    };
    let mut points: Vec<([f64; 2], f64)> = Vec::with_capacity(spec.n);
    for i in 0..outer {
        let t = angle(i, outer);
        points.push(([math::cos(t), math::sin(t)], 0.0));
    }
    for i in 0..inner {
        let t = angle(i, inner);
        points.push(([1.0 - math::cos(t), 0.5 - math::sin(t)], 1.0));
    }
    points.shuffle(&mut rng);

    let mut data = Vec::with_capacity(spec.n * width);
    let mut y = Vec::with_capacity(spec.n);
    for (p, label) in points {
        if spec.noise > 0.0 {
            data.push(p[0] + jitter.sample(&mut rng));
            data.push(p[1] + jitter.sample(&mut rng));
        } else {
            data.extend_from_slice(&p);
        }
        for _ in 0..spec.noise_features {
            data.push(rng.random_range(-1.0..1.0));
        }
        y.push(label);
    }
    let mut x = Matrix::from_vec(spec.n, width, data)?;
    if spec.rotation_deg != 0.0 {
        rotate(&mut x, spec.rotation_deg);
    }
    Dataset::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_points_lie_on_circles() {
        let d = half_moon(HalfMoonSpec {
            noise: 0.0,
            ..HalfMoonSpec::new(101, 1)
        })
        .unwrap();
        assert_eq!(d.n_features(), 2);
        for (row, &y) in d.x.iter_rows().zip(&d.y) {
            let (cx, cy) = if y == 0.0 { (0.0, 0.0) } else { (1.0, 0.5) };
            let r2 = (row[0] - cx) * (row[0] - cx) + (row[1] - cy) * (row[1] - cy);
            assert!((r2 - 1.0).abs() < 1e-12);
            if y == 0.0 {
                assert!(row[1] >= -1e-12);
            } else {
                assert!(row[1] <= 0.5 + 1e-12);
            }
        }
        assert_eq!(d.y.iter().filter(|v| **v == 0.0).count(), 50);
    }

    #[test]
    fn rotation_inverts() {
        let d = half_moon(HalfMoonSpec::new(200, 2)).unwrap();
        let mut x = d.x.clone();
        rotate(&mut x, 45.0);
        rotate(&mut x, -45.0);
        for (a, b) in x.as_slice().iter().zip(d.x.as_slice()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn noise_features_are_appended() {
        let d = half_moon(HalfMoonSpec {
            noise_features: 10,
            ..HalfMoonSpec::new(50, 3)
        })
        .unwrap();
        assert_eq!(d.n_features(), 12);
        assert!(d.x.iter_rows().all(|r| r[2..].iter().all(|v| (-1.0..1.0).contains(v))));
    }

    #[test]
    fn seeded() {
        let a = half_moon(HalfMoonSpec::new(30, 5)).unwrap();
        assert_eq!(a, half_moon(HalfMoonSpec::new(30, 5)).unwrap());
        assert!(half_moon(HalfMoonSpec::new(1, 5)).is_err());
    }
}
