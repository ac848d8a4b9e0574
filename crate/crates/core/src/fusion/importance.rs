//! Token importance from the variability of consecutive-layer similarity,
//! and assembly of the sentence vector.

use crate::error::{Error, Result};
use crate::fusion::config::{FusionConfig, ImportanceMode};
use crate::fusion::weights::{fusion_weights, normalize, uniform, weighted_layer_sum};
use crate::ingest::{LayerStack, SentenceRecord, Token};
use crate::linalg::{cosine_similarity, Vector};
use crate::scalar::Scalar;

/// Cosine similarities between layers `i` and `i + 1`, for `i in 0..N`.
pub fn consecutive_similarities<T: Scalar>(stack: &LayerStack<T>) -> Result<Vec<T>> {
    (0..stack.last_layer())
        .map(|i| cosine_similarity(stack.layer(i), stack.layer(i + 1)))
        .collect()
}

/// Population variance (divide by n). Exactly zero for a constant sequence.
pub fn population_variance<T: Scalar>(xs: &[T]) -> T {
    // Welford updates leave the mean untouched when x equals it.
    let mut mean = T::zero();
    let mut m2 = T::zero();
    for (k, &x) in xs.iter().enumerate() {
        let delta = x - mean;
        mean = mean + delta / T::from_usize(k + 1).unwrap();
        m2 = m2 + delta * (x - mean);
    }
    if xs.is_empty() {
        T::zero()
    } else {
        (m2 / T::from_usize(xs.len()).unwrap()).max(T::zero())
    }
}

/// Variance of the offset-1 diagonal of the token's layer similarity matrix,
/// always over all layers.
pub fn offset1_variance<T: Scalar>(stack: &LayerStack<T>) -> Result<T> {
    Ok(population_variance(&consecutive_similarities(stack)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenImportance<T> {
    pub raw_variance: Vec<T>,
    pub weights: Vec<T>,
    /// Every variance was zero and uniform weights were used instead.
    pub uniform_fallback: bool,
}

pub fn token_importance<T: Scalar>(
    record: &SentenceRecord<T>,
    cfg: &FusionConfig,
) -> Result<TokenImportance<T>> {
    if record.is_empty() {
        return Err(Error::EmptySentence {
            sentence: record.source_index,
        });
    }
    let raw_variance = record
        .tokens
        .iter()
        .map(|t| offset1_variance(&t.stack))
        .collect::<Result<Vec<T>>>()?;
    let n = raw_variance.len();
    if cfg.importance == ImportanceMode::Uniform {
        return Ok(TokenImportance {
            raw_variance,
            weights: uniform(n),
            uniform_fallback: false,
        });
    }
    let (weights, uniform_fallback) = match normalize(&raw_variance) {
        Some(w) => (w, false),
        None => {
            log::warn!(
                "sentence {}: every token has zero variance; using uniform token weights",
                record.source_index
            );
            (uniform(n), true)
        }
    };
    Ok(TokenImportance {
        raw_variance,
        weights,
        uniform_fallback,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedWordVector<T> {
    pub values: Vector<T>,
    pub token_text: String,
}

pub fn unify_token<T: Scalar>(
    token: &Token<T>,
    cfg: &FusionConfig,
) -> Result<UnifiedWordVector<T>> {
    let w = fusion_weights(&token.stack, cfg)?;
    Ok(UnifiedWordVector {
        values: Vector::new(weighted_layer_sum(&token.stack, w.first_layer, &w.combined))?,
        token_text: token.text.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbedding<T> {
    pub values: Vector<T>,
}

/// Sentence embedding together with the token weights that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSentence<T> {
    pub embedding: SentenceEmbedding<T>,
    pub importance: TokenImportance<T>,
}

/// Importance-weighted sum of per-token vectors. `record` must already be
/// filtered and merged as configured (see [`crate::fusion::prepare_record`]).
pub fn embed_sentence<T: Scalar>(
    record: &SentenceRecord<T>,
    cfg: &FusionConfig,
) -> Result<SentenceEmbedding<T>> {
    Ok(embed_sentence_detailed(record, cfg)?.embedding)
}

pub fn embed_sentence_detailed<T: Scalar>(
    record: &SentenceRecord<T>,
    cfg: &FusionConfig,
) -> Result<EmbeddedSentence<T>> {
    let (layers, dim) = record.shape().ok_or(Error::EmptySentence {
        sentence: record.source_index,
    })?;
    cfg.validate(layers)?;
    for t in &record.tokens {
        if t.stack.layer_count() != layers || t.stack.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: layers * dim,
                found: t.stack.layer_count() * t.stack.dim(),
            });
        }
    }
    let importance = token_importance(record, cfg)?;
    let mut out = vec![T::zero(); dim];
    for (tok, &w) in record.tokens.iter().zip(&importance.weights) {
        let vector: Vec<T> = match cfg.importance {
            ImportanceMode::LastLayer => tok.stack.layer(tok.stack.last_layer()).to_vec(),
            ImportanceMode::Variance | ImportanceMode::Uniform => {
                unify_token(tok, cfg)?.values.into_inner()
            }
        };
        for (o, x) in out.iter_mut().zip(vector) {
            *o = *o + w * x;
        }
    }
    Ok(EmbeddedSentence {
        embedding: SentenceEmbedding {
            values: Vector::new(out)?,
        },
        importance,
    })
}
