use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};
use crate::scalar::Scalar;

/// Thin QR factors. Columns of `q` that correspond to linearly dependent
/// input columns are exactly zero, as is the matching diagonal entry of `r`.
#[derive(Debug, Clone)]
pub struct QrFactors<T> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
}

impl<T: Scalar> QrFactors<T> {
    /// Number of non-zero columns in `q`.
    pub fn rank(&self) -> usize {
        (0..self.r.cols())
            .filter(|&j| self.r.get(j, j) > T::zero())
            .count()
    }
}

/// Gram-Schmidt QR with re-orthogonalization (two classical passes per
/// column).
///
/// The diagonal of `R` is non-negative. A column whose remaining norm falls
/// below [`Scalar::rank_tolerance`] times the largest input column norm is
/// treated as dependent: its `Q` column and `R` diagonal are set to zero.
pub fn qr_factorize<T: Scalar>(m: &Matrix<T>) -> Result<QrFactors<T>> {
    let (rows, cols) = (m.rows(), m.cols());
    let reference = m.columns().map(norm).fold(T::zero(), |acc, n| acc.max(n));
    let cutoff = T::rank_tolerance() * reference;

    let mut q = Matrix::zeros(rows, cols);
    let mut r = Matrix::zeros(cols, cols);
    let mut w = vec![T::zero(); rows];

    for j in 0..cols {
        w.copy_from_slice(m.col(j));
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.col(i);
                let h = dot(qi, &w);
                if h == T::zero() {
                    continue;
                }
                r.set(i, j, r.get(i, j) + h);
                for (wk, &qk) in w.iter_mut().zip(qi) {
                    *wk = *wk - h * qk;
                }
            }
        }
        let rjj = norm(&w);
        if !rjj.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "non-finite norm in QR column {j}"
            )));
        }
        if rjj > cutoff && rjj > T::zero() {
            r.set(j, j, rjj);
            for (qk, &wk) in q.col_mut(j).iter_mut().zip(&w) {
                *qk = wk / rjj;
            }
        }
    }
    Ok(QrFactors { q, r })
}
