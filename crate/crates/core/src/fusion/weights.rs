//! Per-token layer weights: inverse alignment, novelty and their mixture.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::fusion::config::{FusionConfig, NoveltyBackend};
use crate::ingest::LayerStack;
use crate::linalg::{
    cosine_similarity, norm, orthonormal_basis_svd, project_residual, qr_factorize, Matrix, Vector,
};
use crate::scalar::Scalar;

/// Mean neighbor similarities below this are raised to it before inversion.
pub const ALIGNMENT_FLOOR: f64 = 1e-3;

/// Layers `j` with `max(start, i - m) <= j <= min(last, i + m)`, `j != i`.
pub fn neighbor_layers(
    i: usize,
    window: usize,
    start_layer: usize,
    last_layer: usize,
) -> impl Iterator<Item = usize> {
    let lo = i.saturating_sub(window).max(start_layer);
    let hi = (i + window).min(last_layer);
    (lo..=hi).filter(move |&j| j != i)
}

/// Layer-wise neighboring matrix of layer `i`: one column per neighbor layer,
/// in ascending layer order.
pub fn neighbor_matrix<T: Scalar>(
    stack: &LayerStack<T>,
    i: usize,
    window: usize,
    start_layer: usize,
) -> Result<Matrix<T>> {
    let last = stack.last_layer();
    if i < start_layer || i > last {
        return Err(Error::InvalidConfig(format!(
            "layer {i} outside included range [{start_layer}, {last}]"
        )));
    }
    let cols: Vec<&[T]> = neighbor_layers(i, window, start_layer, last)
        .map(|j| stack.layer(j))
        .collect();
    if cols.is_empty() {
        return Err(Error::EmptyNeighborhood { layer: i });
    }
    Matrix::from_columns(&cols)
}

fn included(stack: &LayerStack<impl Scalar>, cfg: &FusionConfig) -> Result<RangeInclusive<usize>> {
    cfg.validate(stack.layer_count())?;
    Ok(cfg.start_layer..=stack.last_layer())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentWeights<T> {
    /// Raw mean neighbor similarity, per included layer.
    pub beta: Vec<T>,
    pub weights: Vec<T>,
    /// How many `beta` values were raised to [`ALIGNMENT_FLOOR`].
    pub floored: usize,
}

/// Inverse alignment weights over layers `[start_layer, N]`.
pub fn alignment_weights<T: Scalar>(
    stack: &LayerStack<T>,
    cfg: &FusionConfig,
) -> Result<AlignmentWeights<T>> {
    let range = included(stack, cfg)?;
    let last = stack.last_layer();
    if range.clone().count() == 1 {
        let i = *range.start();
        if norm(stack.layer(i)) == T::zero() {
            return Err(Error::ZeroNormVector);
        }
        return Ok(AlignmentWeights {
            beta: vec![T::one()],
            weights: vec![T::one()],
            floored: 0,
        });
    }
    let floor = T::lit(ALIGNMENT_FLOOR);
    let mut beta = Vec::with_capacity(range.clone().count());
    let mut inverse = Vec::with_capacity(beta.capacity());
    let mut floored = 0;
    for i in range {
        let mut sum = T::zero();
        let mut count = 0usize;
        for j in neighbor_layers(i, cfg.window, cfg.start_layer, last) {
            sum = sum + cosine_similarity(stack.layer(i), stack.layer(j))?;
            count += 1;
        }
        let b = sum / T::from_usize(count).unwrap();
        beta.push(b);
        let clipped = if b < floor {
            floored += 1;
            floor
        } else {
            b
        };
        inverse.push(T::one() / clipped);
    }
    if floored > 0 {
        log::debug!("{floored} alignment scores floored at {ALIGNMENT_FLOOR}");
    }
    Ok(AlignmentWeights {
        beta,
        weights: normalize(&inverse).expect("inverse alignments are positive"),
        floored,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoveltyWeights<T> {
    /// `‖q‖ / ‖v‖` per included layer, in `[0, 1]`.
    pub scores: Vec<T>,
    pub weights: Vec<T>,
    /// Every score was zero and uniform weights were used instead.
    pub uniform_fallback: bool,
}

/// Novelty score of layer `i` by projecting onto an SVD basis of its
/// neighbor matrix.
pub fn novelty_score_svd<T: Scalar>(
    stack: &LayerStack<T>,
    i: usize,
    window: usize,
    start_layer: usize,
) -> Result<T> {
    let v = stack.layer(i);
    let vn = norm(v);
    if vn == T::zero() {
        return Err(Error::ZeroNormVector);
    }
    let c = neighbor_matrix(stack, i, window, start_layer)?;
    let q = match orthonormal_basis_svd(&c)? {
        Some(basis) => norm(&project_residual(v, &basis)?),
        None => vn,
    };
    Ok(snap((q / vn).min(T::one())))
}

/// Novelty score of layer `i` from the QR factors of `[C | v]`: the last
/// diagonal entry of `R` over the norm of the last column of `R`.
pub fn novelty_score_qr<T: Scalar>(
    stack: &LayerStack<T>,
    i: usize,
    window: usize,
    start_layer: usize,
) -> Result<T> {
    let v = stack.layer(i);
    if norm(v) == T::zero() {
        return Err(Error::ZeroNormVector);
    }
    let mut cols: Vec<&[T]> = neighbor_layers(i, window, start_layer, stack.last_layer())
        .map(|j| stack.layer(j))
        .collect();
    if cols.is_empty() {
        return Err(Error::EmptyNeighborhood { layer: i });
    }
    cols.push(v);
    let k = cols.len() - 1;
    let f = qr_factorize(&Matrix::from_columns(&cols)?)?;
    let r_last: Vec<T> = (0..=k).map(|row| f.r.get(row, k)).collect();
    let rn = norm(&r_last);
    if rn == T::zero() {
        return Err(Error::ZeroNormVector);
    }
    Ok(snap((r_last[k].abs() / rn).min(T::one())))
}

fn snap<T: Scalar>(score: T) -> T {
    if score < T::rank_tolerance() {
        T::zero()
    } else {
        score
    }
}

/// Novelty weights over layers `[start_layer, N]` using `backend`.
pub fn novelty_weights<T: Scalar>(
    stack: &LayerStack<T>,
    cfg: &FusionConfig,
    backend: NoveltyBackend,
) -> Result<NoveltyWeights<T>> {
    let range = included(stack, cfg)?;
    if range.clone().count() == 1 {
        if norm(stack.layer(*range.start())) == T::zero() {
            return Err(Error::ZeroNormVector);
        }
        return Ok(NoveltyWeights {
            scores: vec![T::one()],
            weights: vec![T::one()],
            uniform_fallback: false,
        });
    }
    let scores = range
        .map(|i| match backend {
            NoveltyBackend::Qr => novelty_score_qr(stack, i, cfg.window, cfg.start_layer),
            NoveltyBackend::Svd => novelty_score_svd(stack, i, cfg.window, cfg.start_layer),
        })
        .collect::<Result<Vec<T>>>()?;
    let (weights, uniform_fallback) = match normalize(&scores) {
        Some(w) => (w, false),
        None => {
            log::warn!("all novelty scores are zero; using uniform layer weights");
            (uniform(scores.len()), true)
        }
    };
    Ok(NoveltyWeights {
        scores,
        weights,
        uniform_fallback,
    })
}

pub fn novelty_weights_svd<T: Scalar>(
    stack: &LayerStack<T>,
    cfg: &FusionConfig,
) -> Result<NoveltyWeights<T>> {
    novelty_weights(stack, cfg, NoveltyBackend::Svd)
}

pub fn novelty_weights_qr<T: Scalar>(
    stack: &LayerStack<T>,
    cfg: &FusionConfig,
) -> Result<NoveltyWeights<T>> {
    novelty_weights(stack, cfg, NoveltyBackend::Qr)
}

/// `omega * alignment + (1 - omega) * novelty`, elementwise.
pub fn combined_weights<T: Scalar>(alignment: &[T], novelty: &[T], omega: T) -> Vec<T> {
    let rest = T::one() - omega;
    alignment
        .iter()
        .zip(novelty)
        .map(|(&a, &n)| omega * a + rest * n)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionWeights<T> {
    /// Layer index of the first weight.
    pub first_layer: usize,
    pub alignment: AlignmentWeights<T>,
    pub novelty: NoveltyWeights<T>,
    pub combined: Vec<T>,
}

pub fn fusion_weights<T: Scalar>(
    stack: &LayerStack<T>,
    cfg: &FusionConfig,
) -> Result<FusionWeights<T>> {
    let alignment = alignment_weights(stack, cfg)?;
    let novelty = novelty_weights(stack, cfg, cfg.novelty)?;
    let combined = combined_weights(&alignment.weights, &novelty.weights, T::lit(cfg.omega));
    Ok(FusionWeights {
        first_layer: cfg.start_layer,
        alignment,
        novelty,
        combined,
    })
}

/// Weighted sum of the included layers of `stack` under the combined weights.
pub fn unify_stack<T: Scalar>(stack: &LayerStack<T>, cfg: &FusionConfig) -> Result<Vector<T>> {
    let w = fusion_weights(stack, cfg)?;
    Vector::new(weighted_layer_sum(stack, w.first_layer, &w.combined))
}

pub(crate) fn weighted_layer_sum<T: Scalar>(
    stack: &LayerStack<T>,
    first_layer: usize,
    weights: &[T],
) -> Vec<T> {
    let mut out = vec![T::zero(); stack.dim()];
    for (k, &a) in weights.iter().enumerate() {
        for (o, &x) in out.iter_mut().zip(stack.layer(first_layer + k)) {
            *o = *o + a * x;
        }
    }
    out
}

/// l1-normalizes non-negative values; `None` when they sum to zero.
pub(crate) fn normalize<T: Scalar>(values: &[T]) -> Option<Vec<T>> {
    let total: T = values.iter().copied().sum();
    if total > T::zero() && total.is_finite() {
        Some(values.iter().map(|&v| v / total).collect())
    } else {
        None
    }
}

pub(crate) fn uniform<T: Scalar>(n: usize) -> Vec<T> {
    vec![T::one() / T::from_usize(n).unwrap(); n]
}
