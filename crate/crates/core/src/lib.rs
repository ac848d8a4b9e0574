//! Sentence embeddings from layer-wise transformer token representations.
//!
//! Each token's per-layer vectors are fused with weights derived from how
//! much a layer agrees with, and adds to, its neighboring layers; tokens are
//! then weighted by how much their representation changes from layer to
//! layer. The crate also carries the STS evaluation harness and the
//! layer-evolution diagnostics built on the same kernels.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`). The
//! pipeline itself runs in `f64`; see the aliases below.

pub mod analysis;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod ingest;
pub mod linalg;
mod scalar;
pub mod synth;

pub use error::{Error, ErrorClass, Result};
pub use scalar::Scalar;

pub type Vector64 = linalg::Vector<f64>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type LayerStack64 = ingest::LayerStack<f64>;
pub type SentenceRecord64 = ingest::SentenceRecord<f64>;
pub type SentenceEmbedding64 = fusion::SentenceEmbedding<f64>;
pub type FusionWeights64 = fusion::FusionWeights<f64>;
pub type TokenImportance64 = fusion::TokenImportance<f64>;

pub type Vector32 = linalg::Vector<f32>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type LayerStack32 = ingest::LayerStack<f32>;
pub type SentenceRecord32 = ingest::SentenceRecord<f32>;

/// Crate version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
