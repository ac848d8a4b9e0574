//! Layer-wise embedding (LWE) interchange format.
//!
//! Little-endian layout:
//!
//! ```text
//! "LWE1" | u32 version=1 | u32 layer_count | u32 dim | u32 sentence_count
//! per sentence:
//!   u32 token_count
//!   per token: u16 text_len | text (UTF-8) | u8 flags (bit0 special, bit1 continuation)
//!   f32 payload, token-major, then layer, then dimension
//! ```
//!
//! Provenance lives in an optional `<path>.manifest.json` sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::record::{LayerStack, SentenceRecord, Token, TokenFlags};
use crate::error::{Error, Result};

pub const LWE_MAGIC: [u8; 4] = *b"LWE1";
pub const LWE_VERSION: u32 = 1;
pub const LWE_HEADER_LEN: usize = 20;

/// Free-form provenance carried next to an LWE file. Never read by numerics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LweManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokenizer: Option<String>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LweFile {
    pub layer_count: usize,
    pub dim: usize,
    pub records: Vec<SentenceRecord<f32>>,
    pub manifest: Option<LweManifest>,
}

impl LweFile {
    pub fn new(layer_count: usize, dim: usize) -> Self {
        Self {
            layer_count,
            dim,
            records: Vec::new(),
            manifest: None,
        }
    }

    pub fn sentence_count(&self) -> usize {
        self.records.len()
    }
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Reads an LWE file and, if present, its manifest sidecar.
pub fn read_lwe(path: impl AsRef<Path>) -> Result<LweFile> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let mut file = decode_lwe(&bytes)?;
    let side = manifest_path(path);
    if side.exists() {
        let text = fs::read_to_string(&side)?;
        file.manifest = Some(serde_json::from_str(&text)?);
    }
    Ok(file)
}

/// Writes the binary file, plus the manifest sidecar when one is attached.
pub fn write_lwe(file: &LweFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_lwe(file)?;
    fs::write(path, bytes)?;
    if let Some(m) = &file.manifest {
        fs::write(manifest_path(path), serde_json::to_string_pretty(m)? + "\n")?;
    }
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or(Error::Truncated { what })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &'static str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &'static str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn decode_lwe(bytes: &[u8]) -> Result<LweFile> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    let magic: [u8; 4] = cur.take(4, "magic")?.try_into().unwrap();
    if magic != LWE_MAGIC {
        return Err(Error::BadMagic {
            expected: LWE_MAGIC,
            found: magic,
        });
    }
    let version = cur.u32("version")?;
    if version != LWE_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let layer_count = cur.u32("layer count")? as usize;
    let dim = cur.u32("dimension")? as usize;
    let sentence_count = cur.u32("sentence count")? as usize;
    if layer_count == 0 || dim == 0 {
        return Err(Error::Mismatch(format!(
            "header declares layer_count={layer_count}, dim={dim}; both must be positive"
        )));
    }

    let per_token = layer_count * dim;
    let mut records = Vec::with_capacity(sentence_count.min(1 << 16));
    for s in 0..sentence_count {
        let token_count = cur.u32("token count")? as usize;
        let mut heads = Vec::with_capacity(token_count.min(1 << 12));
        for t in 0..token_count {
            let len = cur.u16("token text length")? as usize;
            let raw = cur.take(len, "token text")?;
            let text = std::str::from_utf8(raw)
                .map_err(|e| Error::InvalidToken {
                    sentence: s,
                    token: t,
                    reason: format!("text is not UTF-8: {e}"),
                })?
                .to_owned();
            let flags = TokenFlags::from_bits(cur.u8("token flags")?).map_err(|reason| {
                Error::InvalidToken {
                    sentence: s,
                    token: t,
                    reason,
                }
            })?;
            heads.push((text, flags));
        }
        let payload = cur.take(
            token_count
                .checked_mul(per_token)
                .and_then(|n| n.checked_mul(4))
                .ok_or(Error::Truncated { what: "payload" })?,
            "sentence payload",
        )?;
        let mut tokens = Vec::with_capacity(token_count);
        for (t, ((text, flags), chunk)) in heads
            .into_iter()
            .zip(payload.chunks_exact(per_token * 4))
            .enumerate()
        {
            let mut data = Vec::with_capacity(per_token);
            for (k, b) in chunk.chunks_exact(4).enumerate() {
                let v = f32::from_le_bytes(b.try_into().unwrap());
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue {
                        sentence: s,
                        token: t,
                        layer: k / dim,
                    });
                }
                data.push(v);
            }
            tokens.push(Token {
                text,
                flags,
                stack: LayerStack::new(layer_count, dim, data)?,
            });
        }
        records.push(SentenceRecord {
            tokens,
            source_index: s,
        });
    }
    if cur.pos != bytes.len() {
        return Err(Error::Mismatch(format!(
            "{} trailing bytes after last sentence",
            bytes.len() - cur.pos
        )));
    }
    Ok(LweFile {
        layer_count,
        dim,
        records,
        manifest: None,
    })
}

pub fn encode_lwe(file: &LweFile) -> Result<Vec<u8>> {
    let to_u32 = |n: usize, what: &str| {
        u32::try_from(n).map_err(|_| Error::Mismatch(format!("{what} {n} exceeds u32")))
    };
    let mut out = Vec::with_capacity(LWE_HEADER_LEN);
    out.extend_from_slice(&LWE_MAGIC);
    out.extend_from_slice(&LWE_VERSION.to_le_bytes());
    out.extend_from_slice(&to_u32(file.layer_count, "layer count")?.to_le_bytes());
    out.extend_from_slice(&to_u32(file.dim, "dimension")?.to_le_bytes());
    out.extend_from_slice(&to_u32(file.records.len(), "sentence count")?.to_le_bytes());

    for (s, rec) in file.records.iter().enumerate() {
        out.extend_from_slice(&to_u32(rec.tokens.len(), "token count")?.to_le_bytes());
        for (t, tok) in rec.tokens.iter().enumerate() {
            let bytes = tok.text.as_bytes();
            let len = u16::try_from(bytes.len()).map_err(|_| Error::InvalidToken {
                sentence: s,
                token: t,
                reason: format!("text is {} bytes, limit is 65535", bytes.len()),
            })?;
            if tok.flags.is_special && tok.flags.is_continuation {
                return Err(Error::InvalidToken {
                    sentence: s,
                    token: t,
                    reason: "special token marked as continuation".into(),
                });
            }
            out.extend_from_slice(&len.to_le_bytes());
            out.extend_from_slice(bytes);
            out.push(tok.flags.to_bits());
        }
        for (t, tok) in rec.tokens.iter().enumerate() {
            if tok.stack.layer_count() != file.layer_count || tok.stack.dim() != file.dim {
                return Err(Error::InvalidToken {
                    sentence: s,
                    token: t,
                    reason: format!(
                        "stack is {}x{}, file is {}x{}",
                        tok.stack.layer_count(),
                        tok.stack.dim(),
                        file.layer_count,
                        file.dim
                    ),
                });
            }
            for v in tok.stack.as_slice() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}
