//! Minimal row-major matrix type for the training loop.
//!
//! The kernels the network needs — `A·B`, `Aᵀ·B` and a transpose — are all
//! written as row-streaming multiply-accumulate loops over slices, which
//! keeps every output element a fixed-order sum: results are bit-identical
//! regardless of vector width or the machine the build runs on, and the
//! compiler can still vectorize the elementwise inner loop.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected_rows: rows,
                expected_cols: cols,
                rows: data.len(),
                cols: 1,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    /// `self · rhs` for (m,k)·(k,n).
    pub fn matmul(&self, rhs: &Tensor) -> Result<Tensor> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch {
                expected_rows: self.cols,
                expected_cols: rhs.cols,
                rows: rhs.rows,
                cols: rhs.cols,
            });
        }
        let mut out = Tensor::zeros(self.rows, rhs.cols);
        for (a_row, o_row) in self
            .data
            .chunks_exact(self.cols)
            .zip(out.data.chunks_exact_mut(rhs.cols))
        {
            for (&a, b_row) in a_row.iter().zip(rhs.data.chunks_exact(rhs.cols)) {
                if a != 0.0 {
                    for (o, &b) in o_row.iter_mut().zip(b_row) {
                        *o += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · rhs` for (m,k),(m,n) → (k,n), without materializing selfᵀ.
    pub fn transpose_matmul(&self, rhs: &Tensor) -> Result<Tensor> {
        if self.rows != rhs.rows {
            return Err(Error::ShapeMismatch {
                expected_rows: self.rows,
                expected_cols: rhs.cols,
                rows: rhs.rows,
                cols: rhs.cols,
            });
        }
        let mut out = Tensor::zeros(self.cols, rhs.cols);
        for (a_row, b_row) in self
            .data
            .chunks_exact(self.cols)
            .zip(rhs.data.chunks_exact(rhs.cols))
        {
            for (&a, o_row) in a_row.iter().zip(out.data.chunks_exact_mut(rhs.cols)) {
                if a != 0.0 {
                    for (o, &b) in o_row.iter_mut().zip(b_row) {
                        *o += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transposed(&self) -> Tensor {
        let mut out = Tensor::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// Adds `row` to every row of `self`.
    pub fn add_row_broadcast(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::ShapeMismatch {
                expected_rows: 1,
                expected_cols: self.cols,
                rows: 1,
                cols: row.len(),
            });
        }
        for r in self.data.chunks_exact_mut(self.cols) {
            for (v, b) in r.iter_mut().zip(row) {
                *v += b;
            }
        }
        Ok(())
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = alloc::vec![0.0; self.cols];
        for row in self.data.chunks_exact(self.cols) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// Copies the given rows of `self` into a new tensor, in order.
    pub fn gather_rows(&self, indices: &[usize]) -> Tensor {
        let mut out = Tensor::zeros(indices.len(), self.cols);
        for (dst, &src) in indices.iter().enumerate() {
            out.row_mut(dst).copy_from_slice(self.row(src));
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small_example() {
        let a = Tensor::from_vec(2, 3, alloc::vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = Tensor::from_vec(3, 2, alloc::vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.data(), &[58.0, 64.0, 139.0, 154.0]);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn transpose_matmul_agrees_with_explicit_transpose() {
        let a = Tensor::from_fn(5, 4, |r, c| (r * 7 + c) as f64 * 0.25 - 2.0);
        let b = Tensor::from_fn(5, 3, |r, c| (r + c * c) as f64 * 0.5);
        let fast = a.transpose_matmul(&b).unwrap();
        let slow = a.transposed().matmul(&b).unwrap();
        assert_eq!(fast, slow);
    }

    #[test]
    fn broadcast_and_column_sums() {
        let mut t = Tensor::zeros(3, 2);
        t.add_row_broadcast(&[1.0, -2.0]).unwrap();
        assert_eq!(t.column_sums(), alloc::vec![3.0, -6.0]);
        assert!(t.add_row_broadcast(&[1.0]).is_err());
    }

    #[test]
    fn gather_rows_copies_in_order() {
        let t = Tensor::from_fn(4, 2, |r, c| (10 * r + c) as f64);
        let g = t.gather_rows(&[2, 0, 2]);
        assert_eq!(g.data(), &[20.0, 21.0, 0.0, 1.0, 20.0, 21.0]);
    }
}
