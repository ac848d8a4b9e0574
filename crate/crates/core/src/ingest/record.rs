use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// WordPiece-style prefix carried by continuation tokens.
pub const CONTINUATION_MARKER: &str = "##";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenFlags {
    pub is_special: bool,
    pub is_continuation: bool,
}

impl TokenFlags {
    pub const WORD: Self = Self {
        is_special: false,
        is_continuation: false,
    };
    pub const SPECIAL: Self = Self {
        is_special: true,
        is_continuation: false,
    };
    pub const CONTINUATION: Self = Self {
        is_special: false,
        is_continuation: true,
    };

    pub fn to_bits(self) -> u8 {
        (self.is_special as u8) | ((self.is_continuation as u8) << 1)
    }

    /// Decodes the on-disk flag byte. Unknown bits and special continuations
    /// are rejected.
    pub fn from_bits(bits: u8) -> std::result::Result<Self, String> {
        if bits & !0b11 != 0 {
            return Err(format!("unknown flag bits {bits:#04x}"));
        }
        let flags = Self {
            is_special: bits & 1 != 0,
            is_continuation: bits & 2 != 0,
        };
        if flags.is_special && flags.is_continuation {
            return Err("special token marked as continuation".into());
        }
        Ok(flags)
    }
}

/// All per-layer vectors of one token, stored layer-major: layer 0 is the
/// embedding-layer output, layer `i` the output of transformer layer `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack<T> {
    layer_count: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> LayerStack<T> {
    pub fn new(layer_count: usize, dim: usize, data: Vec<T>) -> Result<Self> {
        if layer_count == 0 || dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if data.len() != layer_count * dim {
            return Err(Error::DimensionMismatch {
                expected: layer_count * dim,
                found: data.len(),
            });
        }
        Ok(Self {
            layer_count,
            dim,
            data,
        })
    }

    pub fn from_layers<L: AsRef<[T]>>(layers: &[L]) -> Result<Self> {
        let dim = layers.first().map(|l| l.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(layers.len() * dim);
        for l in layers {
            let l = l.as_ref();
            if l.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: l.len(),
                });
            }
            data.extend_from_slice(l);
        }
        Self::new(layers.len(), dim, data)
    }

    pub fn layer_count(&self) -> usize {
        self.layer_count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of the last layer (N).
    pub fn last_layer(&self) -> usize {
        self.layer_count - 1
    }

    #[inline]
    pub fn layer(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn layer_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn layers(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn cast<U: Scalar>(&self) -> LayerStack<U> {
        LayerStack {
            layer_count: self.layer_count,
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|&x| U::from_f64(x.as_f64()).unwrap())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token<T> {
    pub text: String,
    pub flags: TokenFlags,
    pub stack: LayerStack<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceRecord<T> {
    pub tokens: Vec<Token<T>>,
    /// Position of the sentence in its source file.
    pub source_index: usize,
}

impl<T: Scalar> SentenceRecord<T> {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// `(layer_count, dim)` shared by every stack, or `None` when empty.
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.tokens
            .first()
            .map(|t| (t.stack.layer_count(), t.stack.dim()))
    }

    pub fn cast<U: Scalar>(&self) -> SentenceRecord<U> {
        SentenceRecord {
            tokens: self
                .tokens
                .iter()
                .map(|t| Token {
                    text: t.text.clone(),
                    flags: t.flags,
                    stack: t.stack.cast(),
                })
                .collect(),
            source_index: self.source_index,
        }
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }
}

/// Folds continuation tokens into the token they continue. The merged stack
/// is the layer-wise mean of its pieces; the merged text drops continuation
/// markers.
pub fn merge_subwords<T: Scalar>(record: &SentenceRecord<T>) -> Result<SentenceRecord<T>> {
    let mut out: Vec<Token<T>> = Vec::with_capacity(record.tokens.len());
    // Number of pieces folded into the last output token, when it is a word.
    let mut pieces = 0usize;

    let finish = |tok: &mut Token<T>, pieces: usize| {
        if pieces > 1 {
            let n = T::from_usize(pieces).unwrap();
            for x in tok.stack.data.iter_mut() {
                *x = *x / n;
            }
        }
    };

    for (idx, tok) in record.tokens.iter().enumerate() {
        if tok.flags.is_continuation {
            let head = match out.last_mut() {
                Some(h) if !h.flags.is_special && pieces > 0 => h,
                _ => {
                    return Err(Error::OrphanContinuation {
                        sentence: record.source_index,
                        token: idx,
                    })
                }
            };
            if head.stack.layer_count != tok.stack.layer_count || head.stack.dim != tok.stack.dim {
                return Err(Error::DimensionMismatch {
                    expected: head.stack.data.len(),
                    found: tok.stack.data.len(),
                });
            }
            for (a, &b) in head.stack.data.iter_mut().zip(&tok.stack.data) {
                *a = *a + b;
            }
            head.text.push_str(
                tok.text
                    .strip_prefix(CONTINUATION_MARKER)
                    .unwrap_or(&tok.text),
            );
            pieces += 1;
        } else {
            if let Some(prev) = out.last_mut() {
                finish(prev, pieces);
            }
            out.push(tok.clone());
            pieces = if tok.flags.is_special { 0 } else { 1 };
        }
    }
    if let Some(prev) = out.last_mut() {
        finish(prev, pieces);
    }
    Ok(SentenceRecord {
        tokens: out,
        source_index: record.source_index,
    })
}

/// Drops `[CLS]`/`[SEP]`-class tokens.
pub fn strip_special_tokens<T: Scalar>(record: &SentenceRecord<T>) -> Result<SentenceRecord<T>> {
    let tokens: Vec<_> = record
        .tokens
        .iter()
        .filter(|t| !t.flags.is_special)
        .cloned()
        .collect();
    if tokens.is_empty() {
        return Err(Error::EmptySentence {
            sentence: record.source_index,
        });
    }
    Ok(SentenceRecord {
        tokens,
        source_index: record.source_index,
    })
}
