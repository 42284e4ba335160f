//! Small dense matrices over any [`Scalar`].
//!
//! Sizes here are bundle dimensions (single digits), so everything is a
//! straightforward row-major `Vec` with partial-pivot LU. Pivoting decisions
//! use only the value component, which keeps derivative components flowing
//! through the same elimination sequence.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Condition numbers at or above this flag a matrix as degenerate.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn values(&self) -> Mat<f64> {
        self.map(|x| x.value())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Mat<T>) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    pub fn matmul(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, o.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..o.cols {
                    out[(i, j)] += a * o[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (j, &x) in v.iter().enumerate() {
                    acc += self[(i, j)] * x;
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Mat<T> {
        self.map(|x| x * s)
    }

    pub fn neg(&self) -> Mat<T> {
        self.map(|x| -x)
    }

    /// Max-row-sum norm of the value components.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.value().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry (value components).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.value().abs()).fold(0.0, f64::max)
    }

    fn lu(&self) -> Option<(Mat<T>, Vec<usize>, bool)> {
        assert_eq!(self.rows, self.cols, "LU of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].value().abs().total_cmp(&a[(j, k)].value().abs()))
                .expect("non-empty pivot range");
            if a[(p, k)].value() == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                odd = !odd;
            }
            let pivot = a[(k, k)];
            for i in (k + 1)..n {
                let factor = a[(i, k)] / pivot;
                a[(i, k)] = factor;
                for j in (k + 1)..n {
                    let u = a[(k, j)];
                    a[(i, j)] -= factor * u;
                }
            }
        }
        Some((a, perm, odd))
    }

    pub fn det(&self) -> T {
        match self.lu() {
            None => T::zero(),
            Some((lu, _, odd)) => {
                let mut d = T::one();
                for i in 0..self.rows {
                    d *= lu[(i, i)];
                }
                if odd {
                    -d
                } else {
                    d
                }
            }
        }
    }

    /// Solve `self · x = b` with partial pivoting.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.rows;
        let (lu, perm, _) = self.lu().ok_or(Error::Singular { condition: f64::INFINITY })?;
        let mut y: Vec<T> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = lu[(i, j)];
                let yj = y[j];
                y[i] -= l * yj;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = lu[(i, j)];
                let yj = y[j];
                y[i] -= u * yj;
            }
            y[i] = y[i] / lu[(i, i)];
        }
        Ok(y)
    }

    /// Inverse plus the ∞-norm condition number `‖A‖·‖A⁻¹‖`.
    pub fn inverse_with_condition(&self) -> Result<(Mat<T>, f64)> {
        let n = self.rows;
        if n == 0 {
            return Ok((Mat::zeros(0, 0), 1.0));
        }
        let (lu, perm, _) = self.lu().ok_or(Error::Singular { condition: f64::INFINITY })?;
        let mut inv = Mat::zeros(n, n);
        for col in 0..n {
            let mut y: Vec<T> = perm.iter().map(|&p| if p == col { T::one() } else { T::zero() }).collect();
            for i in 0..n {
                for j in 0..i {
                    let l = lu[(i, j)];
                    let yj = y[j];
                    y[i] -= l * yj;
                }
            }
            for i in (0..n).rev() {
                for j in (i + 1)..n {
                    let u = lu[(i, j)];
                    let yj = y[j];
                    y[i] -= u * yj;
                }
                y[i] = y[i] / lu[(i, i)];
            }
            for (i, v) in y.into_iter().enumerate() {
                inv[(i, col)] = v;
            }
        }
        let cond = self.norm_inf() * inv.norm_inf();
        Ok((inv, cond))
    }

    /// Inverse, refusing matrices whose condition number reaches
    /// [`CONDITION_LIMIT`].
    pub fn inverse(&self) -> Result<Mat<T>> {
        let (inv, cond) = self.inverse_with_condition()?;
        if !cond.is_finite() || cond >= CONDITION_LIMIT {
            return Err(Error::Singular { condition: cond });
        }
        Ok(inv)
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut l = f.debug_list();
        for i in 0..self.rows {
            l.entry(&&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        l.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_lower_triangular() {
        let a = Mat::from_rows(&[vec![2.0, 0.0], vec![3.0, 4.0]]);
        let inv = a.inverse().unwrap();
        assert_eq!(inv, Mat::from_rows(&[vec![0.5, 0.0], vec![-0.375, 0.25]]));
    }

    #[test]
    fn det_and_solve() {
        let a = Mat::from_rows(&[vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]]);
        assert!((a.det() - (-5.0f64)).abs() < 1e-14);
        let x = a.solve(&[3.0, 2.0, 4.0]).unwrap();
        let b = a.matvec(&x);
        for (bi, ei) in b.iter().zip([3.0, 2.0, 4.0]) {
            assert!((bi - ei).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_is_rejected() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(a.inverse(), Err(Error::Singular { .. })));
        let b = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-14]]);
        assert!(matches!(b.inverse(), Err(Error::Singular { .. })));
    }
}
