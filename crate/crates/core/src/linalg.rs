//! Dense row-major matrices and a one-sided Jacobi singular value decomposition.
//!
//! The problems handled here are small (tens of rows and columns), so the
//! implementation favours accuracy over speed: Jacobi rotations give
//! singular values with high relative accuracy and orthogonal factors to
//! working precision.

use crate::scalar::{compensated_dot, compensated_sum, count, Scalar};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![T::zero(); nrows * ncols],
        }
    }

    /// Builds a matrix from row-major data. Panics if the length does not
    /// match the shape.
    pub fn from_row_major(nrows: usize, ncols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), nrows * ncols, "data length does not match shape");
        Self { nrows, ncols, data }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    /// Builds a matrix whose columns are the given vectors (all the same length).
    pub fn from_columns(columns: &[Vec<T>]) -> Self {
        let ncols = columns.len();
        let nrows = columns.first().map_or(0, Vec::len);
        assert!(columns.iter().all(|c| c.len() == nrows), "ragged columns");
        Self::from_fn(nrows, ncols, |i, j| columns[j][i])
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.ncols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.ncols.max(1)).take(self.nrows)
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.nrows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.ncols).map(|j| self.column(j)).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.rows().map(<[T]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self.get(j, i))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn column_means(&self) -> Vec<T> {
        let n = count::<T>(self.nrows);
        (0..self.ncols)
            .map(|j| compensated_sum((0..self.nrows).map(|i| self.get(i, j))) / n)
            .collect()
    }

    /// Subtracts each column's mean from that column.
    pub fn center_columns(&self) -> Self {
        let means = self.column_means();
        Self::from_fn(self.nrows, self.ncols, |i, j| self.get(i, j) - means[j])
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let cols = other.columns();
        Self::from_fn(self.nrows, other.ncols, |i, j| compensated_dot(self.row(i), &cols[j]))
    }
}

/// Thin singular value decomposition `A = U diag(S) Vᵀ`.
///
/// With `k = min(m, n)`: `u` is m×k, `v` is n×k, singular values are sorted
/// in nonincreasing order. Columns of `u` belonging to zero singular values
/// are zero vectors.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub singular_values: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> Svd<T> {
    /// Number of singular values above `rel_tol × largest`.
    pub fn rank(&self, rel_tol: T) -> usize {
        let Some(&largest) = self.singular_values.first() else {
            return 0;
        };
        if largest <= T::zero() {
            return 0;
        }
        let cutoff = largest * rel_tol;
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }
}

const MAX_SWEEPS: usize = 80;

/// One-sided Jacobi SVD.
pub fn svd<T: Scalar>(a: &Matrix<T>) -> Svd<T> {
    if a.nrows() >= a.ncols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose());
        Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        }
    }
}

fn jacobi_tall<T: Scalar>(a: &Matrix<T>) -> Svd<T> {
    let m = a.nrows();
    let n = a.ncols();
    let mut work = a.columns();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let tol = T::epsilon() * count::<T>(m.max(1));

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = compensated_dot(&work[p], &work[p]);
                let beta = compensated_dot(&work[q], &work[q]);
                let gamma = compensated_dot(&work[p], &work[q]);
                if alpha <= T::min_positive_value() || beta <= T::min_positive_value() {
                    continue;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let two = T::one() + T::one();
                let zeta = (beta - alpha) / (two * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut work, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(T, usize)> = work
        .iter()
        .enumerate()
        .map(|(j, col)| (compensated_dot(col, col).sqrt(), j))
        .collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal).then(x.1.cmp(&y.1)));

    let singular_values: Vec<T> = order.iter().map(|&(s, _)| s).collect();
    let u_cols: Vec<Vec<T>> = order
        .iter()
        .map(|&(s, j)| {
            if s > T::zero() {
                work[j].iter().map(|&x| x / s).collect()
            } else {
                vec![T::zero(); m]
            }
        })
        .collect();
    let v_cols: Vec<Vec<T>> = order.iter().map(|&(_, j)| v[j].clone()).collect();

    Svd {
        u: Matrix::from_columns_or_empty(&u_cols, m),
        singular_values,
        v: Matrix::from_columns_or_empty(&v_cols, n),
    }
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let xq = *y;
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

impl<T: Scalar> Matrix<T> {
    fn from_columns_or_empty(columns: &[Vec<T>], nrows: usize) -> Self {
        if columns.is_empty() {
            Self::zeros(nrows, 0)
        } else {
            Self::from_columns(columns)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(s: &Svd<f64>) -> Matrix<f64> {
        let k = s.singular_values.len();
        Matrix::from_fn(s.u.nrows(), s.v.nrows(), |i, j| {
            (0..k)
                .map(|r| s.u.get(i, r) * s.singular_values[r] * s.v.get(j, r))
                .sum()
        })
    }

    fn assert_close(a: &Matrix<f64>, b: &Matrix<f64>, tol: f64) {
        assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < tol, "{x} vs {y}");
        }
    }

    #[test]
    fn svd_of_diagonal_sorts_values() {
        let a = Matrix::from_row_major(3, 3, vec![1.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 2.0]);
        let s = svd(&a);
        assert_eq!(s.singular_values, vec![3.0, 2.0, 1.0]);
        assert_close(&reconstruct(&s), &a, 1e-14);
    }

    #[test]
    fn svd_reconstructs_tall_and_wide() {
        let tall = Matrix::from_fn(6, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5 + 0.1 * j as f64);
        let s = svd(&tall);
        assert_close(&reconstruct(&s), &tall, 1e-12);
        let wide = tall.transpose();
        let s = svd(&wide);
        assert_eq!(s.u.nrows(), 3);
        assert_eq!(s.v.nrows(), 6);
        assert_close(&reconstruct(&s), &wide, 1e-12);
    }

    #[test]
    fn svd_factors_are_orthonormal() {
        let a = Matrix::from_fn(8, 4, |i, j| ((i as f64 + 1.0) * (j as f64 + 2.0)).sin());
        let s = svd(&a);
        let utu = s.u.transpose().matmul(&s.u);
        let vtv = s.v.transpose().matmul(&s.v);
        let id = Matrix::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.0 });
        assert_close(&utu, &id, 1e-12);
        assert_close(&vtv, &id, 1e-12);
    }

    #[test]
    fn rank_detects_collinear_columns() {
        let a = Matrix::from_fn(5, 3, |i, j| match j {
            0 => i as f64,
            1 => (i * i) as f64,
            _ => 2.0 * i as f64 - (i * i) as f64,
        });
        let s = svd(&a);
        assert_eq!(s.rank(1e-10), 2);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let s = svd(&Matrix::<f64>::zeros(3, 2));
        assert_eq!(s.rank(1e-10), 0);
        assert!(s.singular_values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::from_row_major(2, 2, vec![3.0_f32, 0.0, 4.0, 5.0]);
        let s = svd(&a);
        // singular values of [[3,0],[4,5]] are 3√5 and √5
        assert!((s.singular_values[0] - 45f32.sqrt()).abs() < 1e-5);
        assert!((s.singular_values[1] - 5f32.sqrt()).abs() < 1e-5);
    }
}
