use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 64;

/// Thin singular value decomposition `M = U diag(s) Vᵀ`, singular values
/// sorted in descending order. All `min(rows, cols)`-or-fewer numerically
/// non-zero triplets are kept; zero ones are omitted.
#[derive(Debug, Clone)]
pub struct ThinSvd<T> {
    pub u: Option<Matrix<T>>,
    pub singular_values: Vec<T>,
    pub v: Option<Matrix<T>>,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns of a working copy of `M` are rotated pairwise until mutually
/// orthogonal; their norms are then the singular values and their directions
/// the left singular vectors. Singular values below
/// [`Scalar::rank_tolerance`] times the largest are dropped.
pub fn thin_svd<T: Scalar>(m: &Matrix<T>) -> Result<ThinSvd<T>> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut v = Matrix::<T>::identity(cols);

    let frob = m.frobenius_norm();
    // Columns this small cannot influence the retained basis; rotating them
    // only churns rounding noise.
    let negligible = {
        let x = T::lit(1e-12) * frob;
        x * x
    };
    let eps = T::epsilon() * T::from_usize(rows.max(cols)).unwrap();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = dot(a.col(p), a.col(p));
                let beta = dot(a.col(q), a.col(q));
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dot(a.col(p), a.col(q));
                if gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut triplets: Vec<(T, usize)> = (0..cols)
        .map(|j| (dot(a.col(j), a.col(j)).sqrt(), j))
        .collect();
    if triplets.iter().any(|(s, _)| !s.is_finite()) {
        return Err(Error::NumericalFailure("non-finite singular value".into()));
    }
    triplets.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));
    let smax = triplets.first().map(|t| t.0).unwrap_or_else(T::zero);
    let cutoff = T::rank_tolerance() * smax;
    triplets.retain(|&(s, _)| s > cutoff && s > T::zero());

    if triplets.is_empty() {
        return Ok(ThinSvd {
            u: None,
            singular_values: Vec::new(),
            v: None,
        });
    }
    let k = triplets.len();
    let mut u = Matrix::zeros(rows, k);
    let mut vk = Matrix::zeros(cols, k);
    for (out, &(s, j)) in triplets.iter().enumerate() {
        for (dst, &src) in u.col_mut(out).iter_mut().zip(a.col(j)) {
            *dst = src / s;
        }
        vk.col_mut(out).copy_from_slice(v.col(j));
    }
    Ok(ThinSvd {
        u: Some(u),
        singular_values: triplets.into_iter().map(|t| t.0).collect(),
        v: Some(vk),
    })
}

fn rotate<T: Scalar>(m: &mut Matrix<T>, p: usize, q: usize, c: T, s: T) {
    let rows = m.rows();
    for i in 0..rows {
        let x = m.get(i, p);
        let y = m.get(i, q);
        m.set(i, p, c * x - s * y);
        m.set(i, q, s * x + c * y);
    }
}

/// Orthonormal basis for the column space of `m`, taken from the left
/// singular vectors with non-negligible singular values. `None` when `m` is
/// numerically zero.
pub fn orthonormal_basis_svd<T: Scalar>(m: &Matrix<T>) -> Result<Option<Matrix<T>>> {
    Ok(thin_svd(m)?.u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm, project_residual};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Matrix::from_col_major(rows, cols, data).unwrap()
    }

    #[test]
    fn identity_spans_everything() {
        let b = orthonormal_basis_svd(&Matrix::<f64>::identity(3))
            .unwrap()
            .unwrap();
        assert_eq!(b.cols(), 3);
        let v = [0.5, -1.5, 2.0];
        let r = project_residual(&v, &b).unwrap();
        assert!(norm(&r) < 1e-12);
    }

    #[test]
    fn duplicate_columns_give_rank_one() {
        let m = Matrix::from_columns(&[[1.0_f64, 1.0, 0.0], [1.0, 1.0, 0.0]]).unwrap();
        let b = orthonormal_basis_svd(&m).unwrap().unwrap();
        assert_eq!(b.cols(), 1);
        let r = project_residual(&[1.0, 1.0, 0.0], &b).unwrap();
        assert!(norm(&r) < 1e-12);
        let r = project_residual(&[0.0, 0.0, 1.0], &b).unwrap();
        assert!((r[2] - 1.0).abs() < 1e-12);
        let p: Vec<f64> = [0.0, 0.0, 1.0].iter().zip(&r).map(|(a, b)| a - b).collect();
        assert!(norm(&p) < 1e-12);
    }

    #[test]
    fn random_basis_is_orthonormal_and_reproduces() {
        for seed in 0..10 {
            let m = random(768, 4, seed);
            let svd = thin_svd(&m).unwrap();
            let u = svd.u.as_ref().unwrap();
            let g = u.transpose().matmul(u).unwrap();
            let e = g.sub(&Matrix::identity(4)).unwrap();
            assert!(e.as_col_major().iter().all(|x| x.abs() < 1e-8));
            for c in m.columns() {
                let r = project_residual(c, u).unwrap();
                assert!(norm(&r) <= 1e-6 * norm(c));
            }
            // U diag(s) Vᵀ reconstructs M.
            let mut us = u.clone();
            for (j, &s) in svd.singular_values.iter().enumerate() {
                us.col_mut(j).iter_mut().for_each(|x| *x *= s);
            }
            let rec = us.matmul(&svd.v.as_ref().unwrap().transpose()).unwrap();
            assert!(rec.sub(&m).unwrap().frobenius_norm() < 1e-10 * m.frobenius_norm());
            assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn singular_values_of_diagonal() {
        let m = Matrix::from_columns(&[[3.0_f64, 0.0], [0.0, -5.0]]).unwrap();
        let s = thin_svd(&m).unwrap().singular_values;
        assert!((s[0] - 5.0).abs() < 1e-14 && (s[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_has_empty_basis() {
        assert!(orthonormal_basis_svd(&Matrix::<f64>::zeros(4, 2))
            .unwrap()
            .is_none());
    }

    #[test]
    fn wide_matrix() {
        let m = random(4, 6, 11);
        let b = orthonormal_basis_svd(&m).unwrap().unwrap();
        assert_eq!(b.cols(), 4);
    }
}
