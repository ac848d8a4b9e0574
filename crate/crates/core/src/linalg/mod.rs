//! Small dense kernels: cosine similarity, Gram-Schmidt QR, one-sided Jacobi
//! SVD and orthogonal projection residuals.
//!
//! Matrices are stored column-major because every caller works on columns
//! (one column per layer vector).

mod qr;
mod svd;

pub use qr::{qr_factorize, QrFactors};
pub use svd::{orthonormal_basis_svd, thin_svd, ThinSvd};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finite, non-empty vector of embedding coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<T>(Vec<T>);

impl<T: Scalar> Vector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> AsRef<[T]> for Vector<T> {
    fn as_ref(&self) -> &[T] {
        &self.0
    }
}

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
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
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns<C: AsRef<[T]>>(columns: &[C]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map(|c| c.as_ref().len()).unwrap_or(0);
        if cols == 0 || rows == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut data = Vec::with_capacity(rows * cols);
        for c in columns {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Self::from_col_major(rows, cols, data)
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { rows, cols, data })
    }

    /// Row-major convenience constructor, mostly for tests.
    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Self::from_col_major(r, c, m.data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.rows)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = other.get(k, j);
                if b == T::zero() {
                    continue;
                }
                let a = self.col(k);
                for (o, &x) in out.col_mut(j).iter_mut().zip(a) {
                    *o = *o + x * b;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> T {
        norm(&self.data)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn as_col_major(&self) -> &[T] {
        &self.data
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Cosine of the angle between `a` and `b`, clamped to `[-1, 1]`.
pub fn cosine_similarity<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let na = norm(a);
    let nb = norm(b);
    if na == T::zero() || nb == T::zero() {
        return Err(Error::ZeroNormVector);
    }
    let c = dot(a, b) / (na * nb);
    if !c.is_finite() {
        return Err(Error::NumericalFailure("cosine is not finite".into()));
    }
    Ok(c.max(-T::one()).min(T::one()))
}

/// Component of `v` orthogonal to the column space of `basis`:
/// `v - B Bᵀ v`. Zero columns of `basis` are ignored.
pub fn project_residual<T: Scalar>(v: &[T], basis: &Matrix<T>) -> Result<Vec<T>> {
    if v.len() != basis.rows() {
        return Err(Error::DimensionMismatch {
            expected: basis.rows(),
            found: v.len(),
        });
    }
    // Coefficients are taken against the original vector (B Bᵀ v), then a
    // second pass removes what rounding left behind.
    let mut r = v.to_vec();
    for _ in 0..2 {
        let coeffs: Vec<T> = basis.columns().map(|q| dot(q, &r)).collect();
        for (q, c) in basis.columns().zip(coeffs) {
            if c == T::zero() {
                continue;
            }
            for (ri, &qi) in r.iter_mut().zip(q) {
                *ri = *ri - c * qi;
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cosine_examples() {
        assert_abs_diff_eq!(cosine_similarity(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_similarity(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(c, 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn cosine_rejects_zero_and_mismatch() {
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroNormVector)
        ));
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cosine_is_clamped() {
        let a = [1e-3_f64, 1e-3, 1e-3];
        let c = cosine_similarity(&a, &a).unwrap();
        assert!(c <= 1.0);
        let f = cosine_similarity(&[0.1_f32, 0.7], &[0.1, 0.7]).unwrap();
        assert!(f <= 1.0);
    }

    #[test]
    fn residual_examples() {
        let b = Matrix::from_columns(&[[1.0, 0.0]]).unwrap();
        let r = project_residual(&[1.0, 1.0], &b).unwrap();
        assert_abs_diff_eq!(r[0], 0.0);
        assert_abs_diff_eq!(r[1], 1.0);

        let b = Matrix::<f64>::identity(3);
        let r = project_residual(&[0.3, -2.0, 5.0], &b).unwrap();
        assert!(norm(&r) <= 1e-8 * norm(&[0.3, -2.0, 5.0]));

        let b = Matrix::from_columns(&[[1.0_f64, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let v = [0.0, 0.0, 7.25];
        let r = project_residual(&v, &b).unwrap();
        for (a, e) in r.iter().zip(v) {
            assert!((a - e).abs() <= 1e-12);
        }
        assert!(matches!(
            project_residual(&[1.0, 2.0], &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn matrix_constructors_validate() {
        assert!(Matrix::<f64>::from_columns::<[f64; 0]>(&[]).is_err());
        assert!(Matrix::from_columns(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(matches!(
            Matrix::from_columns(&[[f64::NAN, 1.0]]),
            Err(Error::NonFiniteInput)
        ));
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]).unwrap();
        assert_eq!(m.col(1), &[2.0, 4.0, 6.0]);
        let p = m.transpose().matmul(&m).unwrap();
        assert_eq!(p.get(0, 1), 44.0);
        assert!(Vector::<f64>::new(vec![]).is_err());
        assert!(Vector::new(vec![1.0, f64::INFINITY]).is_err());
    }
}
