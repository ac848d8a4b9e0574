//! Reading and writing layer-wise embedding files, and turning their
//! sentences into the token sequences the fusion step consumes.

mod emb;
mod lwe;
mod record;

pub use emb::{EmbeddingFile, EMB_MAGIC, EMB_VERSION};
pub use lwe::{
    decode_lwe, encode_lwe, manifest_path, read_lwe, write_lwe, LweFile, LweManifest,
    LWE_HEADER_LEN, LWE_MAGIC, LWE_VERSION,
};
pub use record::{
    merge_subwords, strip_special_tokens, LayerStack, SentenceRecord, Token, TokenFlags,
    CONTINUATION_MARKER,
};
