//! Fusion of a token's layer stack into one vector, and of a sentence's
//! tokens into one embedding.
//!
//! For each included layer `i` of a token (layers `start_layer..=N`):
//!
//! * the inverse alignment weight is proportional to one over the mean
//!   cosine similarity between layer `i` and its layer-neighbors within the
//!   window `m`;
//! * the novelty weight is proportional to `‖q‖ / ‖v‖`, where `q` is the part
//!   of layer `i` orthogonal to the span of its neighbors;
//! * the combined weight is `omega * alignment + (1 - omega) * novelty`.
//!
//! Tokens are then weighted by the l1-normalized variance of their
//! consecutive-layer cosine similarities.

mod config;
mod importance;
mod weights;

pub use config::{FusionConfig, ImportanceMode, NoveltyBackend};
pub use importance::{
    consecutive_similarities, embed_sentence, embed_sentence_detailed, offset1_variance,
    population_variance, token_importance, unify_token, EmbeddedSentence, SentenceEmbedding,
    TokenImportance, UnifiedWordVector,
};
pub use weights::{
    alignment_weights, combined_weights, fusion_weights, neighbor_layers, neighbor_matrix,
    novelty_score_qr, novelty_score_svd, novelty_weights, novelty_weights_qr, novelty_weights_svd,
    unify_stack, AlignmentWeights, FusionWeights, NoveltyWeights, ALIGNMENT_FLOOR,
};

use rayon::prelude::*;

use crate::error::Result;
use crate::ingest::{merge_subwords, strip_special_tokens, SentenceRecord};
use crate::scalar::Scalar;

/// Applies the configured special-token filtering and subword merging, then
/// widens values to `T`.
pub fn prepare_record<T: Scalar>(
    record: &SentenceRecord<f32>,
    cfg: &FusionConfig,
) -> Result<SentenceRecord<T>> {
    let mut r = if cfg.keep_special {
        if record.is_empty() {
            return Err(crate::Error::EmptySentence {
                sentence: record.source_index,
            });
        }
        record.clone()
    } else {
        strip_special_tokens(record)?
    };
    if cfg.merge_subwords {
        r = merge_subwords(&r)?;
    }
    Ok(r.cast())
}

/// Embeds every record in parallel on the current rayon pool. Output order
/// matches input order and values do not depend on the thread count.
pub fn embed_records<T: Scalar>(
    records: &[SentenceRecord<f32>],
    cfg: &FusionConfig,
) -> Result<Vec<EmbeddedSentence<T>>> {
    records
        .par_iter()
        .map(|r| embed_sentence_detailed(&prepare_record::<T>(r, cfg)?, cfg))
        .collect()
}
