//! Semantic textual similarity evaluation: gold-file parsing, cosine scoring
//! of sentence pairs and Pearson/Spearman correlation.

mod stats;
mod sts;

pub use stats::{average_ranks, pearson, spearman};
pub use sts::{
    evaluate, interleaved_pairs, parse_sts_str, parse_sts_tsv, percent2, score_pairs,
    CorrelationJson, CorrelationReport, GoldRow, StsDataset, StsPair, StsReport, MAX_GOLD,
};
