//! Dense square matrices over any [`Scalar`].
//!
//! Storage is row-major and dense so indices line up one-to-one with the
//! channel's input/output ordering. Products skip zero entries, which keeps
//! the sparse channel matrices and their inverses cheap to multiply.

use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix<T> {
    dim: usize,
    entries: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        // dim 0 never occurs, chunks_exact(0) would panic
        self.entries.chunks_exact(self.dim.max(1))
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn map<U, F: FnMut(&T) -> U>(&self, f: F) -> Matrix<U> {
        Matrix {
            dim: self.dim,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> T>(dim: usize, mut f: F) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Matrix { dim, entries }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(Matrix { dim, entries })
    }
}

impl<T: Clone> Matrix<T> {
    /// `Ĩ M Ĩ`: entry `(i, j)` moves to `(dim-1-i, dim-1-j)`.
    pub fn exchange_conjugate(&self) -> Self {
        let mut entries = self.entries.clone();
        entries.reverse();
        Matrix {
            dim: self.dim,
            entries,
        }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.dim, |i, j| self.get(j, i).clone())
    }

    /// Copies the `size × size` block whose top-left corner is `(row, col)`.
    pub fn block(&self, row: usize, col: usize, size: usize) -> Self {
        Matrix::from_fn(size, |i, j| self.get(row + i, col + j).clone())
    }

    /// Assembles `[[tl, tr], [bl, br]]` from four equal-size blocks.
    pub fn from_blocks(tl: &Self, tr: &Self, bl: &Self, br: &Self) -> Self {
        Self::from_block_grid(&[vec![tl, tr], vec![bl, br]])
    }

    /// Assembles a `k × k` grid of equal-size square blocks.
    pub fn from_block_grid(grid: &[Vec<&Self>]) -> Self {
        let k = grid.len();
        let b = grid[0][0].dim;
        debug_assert!(grid
            .iter()
            .all(|r| r.len() == k && r.iter().all(|m| m.dim == b)));
        let dim = k * b;
        let mut entries = Vec::with_capacity(dim * dim);
        for block_row in grid {
            for i in 0..b {
                for m in block_row {
                    entries.extend_from_slice(m.row(i));
                }
            }
        }
        Matrix { dim, entries }
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            entries: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Matrix::from_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// The exchange (anti-identity) matrix `Ĩ`.
    pub fn exchange(dim: usize) -> Self {
        Matrix::from_fn(dim, |i, j| {
            if i + j + 1 == dim {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    pub fn is_identity(&self) -> bool {
        self.rows().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })
        })
    }

    pub fn mul_pow2(&self, k: i32) -> Self {
        self.map(|x| x.mul_pow2(k))
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.map(|x| x.scale_int(k))
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Matrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn count_nonzero(&self) -> usize {
        self.entries.iter().filter(|x| !x.is_zero()).count()
    }

    fn nonzero_columns(&self) -> Vec<Vec<usize>> {
        self.rows()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect()
    }

    /// Matrix product; zero entries of either factor are skipped.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let dim = self.dim;
        let rhs_support = rhs.nonzero_columns();
        let mut out = Matrix::zeros(dim);
        for i in 0..dim {
            let out_row = &mut out.entries[i * dim..(i + 1) * dim];
            for (k, a) in self.row(i).iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for &j in &rhs_support[k] {
                    let prod = a.clone() * rhs.get(k, j).clone();
                    let slot = &mut out_row[j];
                    *slot = std::mem::replace(slot, T::zero()) + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        self.rows()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// `Mᵀ v` without materializing the transpose.
    pub fn transpose_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        let mut out = vec![T::zero(); self.dim];
        for (row, x) in self.rows().zip(v) {
            if x.is_zero() {
                continue;
            }
            for (slot, a) in out.iter_mut().zip(row) {
                if !a.is_zero() {
                    *slot = std::mem::replace(slot, T::zero()) + a.clone() * x.clone();
                }
            }
        }
        out
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.rows()
            .map(|row| row.iter().fold(T::zero(), |acc, x| acc + x.clone()))
            .collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (row, col): (usize, usize)) -> &T {
        self.get(row, col)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Dyadic;

    fn m(rows: &[&[i64]]) -> Matrix<Dyadic> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Dyadic::from_integer(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn product_matches_schoolbook() {
        let a = m(&[&[1, 2], &[0, -1]]);
        let b = m(&[&[3, 0], &[4, 5]]);
        assert_eq!(a.mul(&b), m(&[&[11, 10], &[-4, -5]]));
    }

    #[test]
    fn exchange_conjugate_equals_explicit_product() {
        let a = m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        let j = Matrix::<Dyadic>::exchange(3);
        assert_eq!(a.exchange_conjugate(), j.mul(&a).mul(&j));
        assert_eq!(a.exchange_conjugate().exchange_conjugate(), a);
    }

    #[test]
    fn blocks_round_trip() {
        let a = m(&[
            &[1, 2, 3, 4],
            &[5, 6, 7, 8],
            &[9, 10, 11, 12],
            &[13, 14, 15, 16],
        ]);
        let rebuilt = Matrix::from_blocks(
            &a.block(0, 0, 2),
            &a.block(0, 2, 2),
            &a.block(2, 0, 2),
            &a.block(2, 2, 2),
        );
        assert_eq!(rebuilt, a);
    }

    #[test]
    fn vector_products() {
        let a = m(&[&[1, 2], &[3, 4]]);
        let v = vec![Dyadic::from_integer(1), Dyadic::from_integer(-1)];
        assert_eq!(
            a.mul_vec(&v),
            vec![Dyadic::from_integer(-1), Dyadic::from_integer(-1)]
        );
        assert_eq!(a.transpose_mul_vec(&v), a.transpose().mul_vec(&v));
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(Matrix::<f64>::from_rows(rows).is_err());
    }
}
