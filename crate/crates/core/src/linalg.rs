//! Small dense matrix type and the two solvers the crate needs: an LU solve
//! with a conditioning check and a minimum-norm least-squares solve.
//!
//! Factorizations are delegated to `nalgebra` and carried out in `f64`
//! regardless of the caller's scalar type.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is numerically singular (condition estimate {condition:e})")]
    Singular { condition: f64 },
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<T>>", into = "Vec<Vec<T>>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::Shape("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(T::zero(), |a, &b| a + b))
            .collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        let mut sums = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for (s, &x) in sums.iter_mut().zip(self.row(i)) {
                *s = *s + x;
            }
        }
        sums
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(T::zero(), |a, &b| a + b.abs()))
            .fold(T::zero(), T::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    fn to_na(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().map(|x| x.to_f64_lossy()))
    }

    fn from_na(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| T::lit(m[(i, j)]))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> TryFrom<Vec<Vec<T>>> for Matrix<T> {
    type Error = LinalgError;

    fn try_from(rows: Vec<Vec<T>>) -> Result<Self, Self::Error> {
        Self::from_rows(rows)
    }
}

impl<T: Real> From<Matrix<T>> for Vec<Vec<T>> {
    fn from(m: Matrix<T>) -> Self {
        m.to_rows()
    }
}

/// Solves `A X = B` by LU factorization with partial pivoting.
///
/// Fails when the 1-norm condition estimate of `A` exceeds
/// `1 / (n * f64::EPSILON)`.
pub fn lu_solve<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(LinalgError::Shape(format!(
            "cannot solve {}x{} system with {}x{} right-hand side",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(b.clone());
    }
    let na = a.to_na();
    let lu = na.clone().lu();
    let inverse = lu
        .try_inverse()
        .ok_or(LinalgError::Singular { condition: f64::INFINITY })?;
    let condition = norm1(&na) * norm1(&inverse);
    if !condition.is_finite() || condition > 1.0 / (n as f64 * f64::EPSILON) {
        return Err(LinalgError::Singular { condition });
    }
    let x = lu
        .solve(&b.to_na())
        .ok_or(LinalgError::Singular { condition })?;
    Ok(Matrix::from_na(&x))
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Result of a least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares<T> {
    pub solution: Vec<T>,
    /// Numerical rank of the design matrix.
    pub rank: usize,
    /// True when the design has fewer independent columns than unknowns,
    /// in which case `solution` is the minimum-norm minimizer.
    pub rank_deficient: bool,
}

/// Minimum-norm solution of `min ||A x - b||` via the SVD.
///
/// Singular values below `max(rows, cols) * eps * sigma_max` are treated as
/// zero.
pub fn lstsq_min_norm<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<LeastSquares<T>, LinalgError> {
    if a.rows() != b.len() {
        return Err(LinalgError::Shape(format!(
            "{} equations but {} targets",
            a.rows(),
            b.len()
        )));
    }
    let cols = a.cols();
    if a.rows() == 0 || cols == 0 {
        return Ok(LeastSquares {
            solution: vec![T::zero(); cols],
            rank: 0,
            rank_deficient: cols > 0,
        });
    }
    let na = a.to_na();
    let rhs = DMatrix::from_iterator(b.len(), 1, b.iter().map(|x| x.to_f64_lossy()));
    let svd = na.svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = a.rows().max(cols) as f64 * f64::EPSILON * sigma_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let x = svd
        .solve(&rhs, eps)
        .map_err(|e| LinalgError::Shape(e.to_string()))?;
    Ok(LeastSquares {
        solution: x.iter().map(|&v| T::lit(v)).collect(),
        rank,
        rank_deficient: rank < cols,
    })
}
