use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape_err!(
                "{} values cannot fill a {}x{} matrix",
                data.len(),
                rows,
                cols
            ));
        }
        if !super::all_finite(&data) {
            return Err(Error::NonFinite("matrix entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(shape_err!("row {} has {} columns, expected {}", i, row.len(), cols));
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact on an empty-column matrix would panic
        let cols = self.cols.max(1);
        self.data.chunks_exact(cols).take(self.rows)
    }

    /// Selects a subset of rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// `out = self^T v + bias`, accumulating over rows in ascending order.
    ///
    /// This is the layer map `W^T e + beta` with `W` stored as (inputs x outputs).
    pub fn transpose_matvec_into(&self, v: &[f64], bias: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(bias.len(), self.cols);
        debug_assert_eq!(out.len(), self.cols);
        out.copy_from_slice(bias);
        for (row, &x) in self.iter_rows().zip(v) {
            if x == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(row) {
                *o += w * x;
            }
        }
    }

    /// `self v` for a vector of length `cols`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(shape_err!("matvec: {}x{} by vector of {}", self.rows, self.cols, v.len()));
        }
        Ok(self
            .iter_rows()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        super::all_finite(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Matrix product `a b`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(shape_err!(
            "matmul of {}x{} by {}x{}",
            a.rows,
            a.cols,
            b.rows,
            b.cols
        ));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (p, &aip) in a.row(i).iter().enumerate() {
            for (o, &bpj) in out_row.iter_mut().zip(b.row(p)) {
                *o += aip * bpj;
            }
        }
    }
    if !out.is_finite() {
        return Err(Error::NonFinite("matmul result".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::SeededRng;
    use rand::Rng;

    fn naive(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for p in 0..a.cols() {
                    s += a.get(i, p) * b.get(p, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    fn random(rng: &mut SeededRng, r: usize, c: usize) -> Matrix {
        let data = (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect();
        Matrix::from_vec(r, c, data).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = SeededRng::new(3);
        let m = random(&mut rng, 3, 4);
        assert_eq!(matmul(&Matrix::identity(3), &m).unwrap(), m);
    }

    #[test]
    fn small_product() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let c = matmul(&a, &b).unwrap();
        assert_eq!(c.as_slice(), &[2.0, 4.0]);
    }

    #[test]
    fn matches_triple_loop() {
        let mut rng = SeededRng::new(11);
        let a = random(&mut rng, 5, 7);
        let b = random(&mut rng, 7, 3);
        let fast = matmul(&a, &b).unwrap();
        let slow = naive(&a, &b);
        for (x, y) in fast.as_slice().iter().zip(slow.as_slice()) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn dimension_mismatch_names_shapes() {
        let err = matmul(&Matrix::zeros(2, 3), &Matrix::zeros(2, 3)).unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("2x3 by 2x3"), "{msg}");
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Matrix::from_vec(1, 1, vec![f64::NAN]).is_err());
        assert!(Matrix::from_vec(1, 2, vec![0.0]).is_err());
    }

    #[test]
    fn transpose_matvec_matches_explicit_transpose() {
        let mut rng = SeededRng::new(5);
        let w = random(&mut rng, 6, 2);
        let v: Vec<f64> = (0..6).map(|i| i as f64 * 0.25 - 0.5).collect();
        let bias = [0.1, -0.2];
        let mut out = [0.0; 2];
        w.transpose_matvec_into(&v, &bias, &mut out);
        let expect = w.transpose().matvec(&v).unwrap();
        for o in 0..2 {
            assert!((out[o] - expect[o] - bias[o]).abs() < 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn matmul_agrees_with_oracle(r in 1usize..32, k in 1usize..32, c in 1usize..32, seed in 0u64..1000) {
            let mut rng = SeededRng::new(seed);
            let a = random(&mut rng, r, k);
            let b = random(&mut rng, k, c);
            let fast = matmul(&a, &b).unwrap();
            let slow = naive(&a, &b);
            for (x, y) in fast.as_slice().iter().zip(slow.as_slice()) {
                let scale: f64 = y.abs().max(1.0);
                proptest::prop_assert!((x - y).abs() <= 1e-12 * scale);
            }
        }
    }
}
