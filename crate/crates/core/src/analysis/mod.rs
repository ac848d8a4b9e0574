//! Layer-evolution diagnostics: averaged layer similarity maps, offset
//! diagonals, per-word variance rankings and their relation to IDF.

mod pvalue;

pub use pvalue::{correlation_p_value, ln_gamma, regularized_incomplete_beta, student_t_two_sided};

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::spearman;
use crate::fusion::offset1_variance;
use crate::ingest::{merge_subwords, strip_special_tokens, LayerStack, LweFile, SentenceRecord};
use crate::linalg::{cosine_similarity, Matrix};
use crate::scalar::Scalar;

pub const DEFAULT_MIN_OCCURRENCES: usize = 50;

/// `(N+1) x (N+1)` cosine similarities between all layer pairs of one token.
/// The diagonal is exactly one.
pub fn cosine_matrix<T: Scalar>(stack: &LayerStack<T>) -> Result<Matrix<T>> {
    let n = stack.layer_count();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, T::one());
        for j in (i + 1)..n {
            let c = cosine_similarity(stack.layer(i), stack.layer(j))?;
            m.set(i, j, c);
            m.set(j, i, c);
        }
    }
    // Zero vectors only surface through an off-diagonal pair; a 1-layer stack
    // still needs the check.
    if n == 1 && stack.layer(0).iter().all(|&x| x == T::zero()) {
        return Err(Error::ZeroNormVector);
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMap {
    pub matrix: Matrix<f64>,
    /// Number of token occurrences averaged.
    pub word_count: usize,
}

/// Mean of per-token cosine matrices over every non-special token in the
/// file, each token taken in isolation.
pub fn average_similarity_map(file: &LweFile) -> Result<SimilarityMap> {
    let n = file.layer_count;
    let partials = file
        .records
        .par_iter()
        .map(|r| {
            let mut sum = vec![0.0_f64; n * n];
            let mut count = 0usize;
            for t in r.tokens.iter().filter(|t| !t.flags.is_special) {
                let m = cosine_matrix(&t.stack.cast::<f64>())?;
                for (s, &v) in sum.iter_mut().zip(m.as_col_major()) {
                    *s += v;
                }
                count += 1;
            }
            Ok((sum, count))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = vec![0.0_f64; n * n];
    let mut count = 0usize;
    for (sum, c) in partials {
        for (t, s) in total.iter_mut().zip(sum) {
            *t += s;
        }
        count += c;
    }
    if count == 0 {
        return Err(Error::EmptyCorpus);
    }
    let k = count as f64;
    let data: Vec<f64> = total.into_iter().map(|v| v / k).collect();
    let mut matrix = Matrix::from_col_major(n, n, data)?;
    for i in 0..n {
        matrix.set(i, i, 1.0);
    }
    Ok(SimilarityMap {
        matrix,
        word_count: count,
    })
}

/// Entries `(i, i + k)` of a square matrix, `i` in `0..=size-1-k`.
pub fn offset_diagonal<T: Scalar>(m: &Matrix<T>, k: usize) -> Result<Vec<T>> {
    let size = m.rows();
    if m.cols() != size {
        return Err(Error::DimensionMismatch {
            expected: size,
            found: m.cols(),
        });
    }
    if k == 0 || k >= size {
        return Err(Error::OffsetOutOfRange { offset: k, size });
    }
    Ok((0..size - k).map(|i| m.get(i, i + k)).collect())
}

/// Tokens made only of non-alphanumeric characters are not words.
pub fn is_punctuation(text: &str) -> bool {
    !text.chars().any(char::is_alphanumeric)
}

/// Word identity used by the variance tables.
pub fn word_key(text: &str) -> Option<String> {
    if is_punctuation(text) {
        None
    } else {
        Some(text.to_lowercase())
    }
}

/// Strips special tokens and merges subwords; sentences with no remaining
/// tokens are skipped.
fn word_records(file: &LweFile) -> Result<Vec<SentenceRecord<f32>>> {
    let mut out = Vec::with_capacity(file.records.len());
    for r in &file.records {
        match strip_special_tokens(r) {
            Ok(s) => out.push(merge_subwords(&s)?),
            Err(Error::EmptySentence { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Per-sentence word lists (lowercased, punctuation dropped, subwords
/// merged).
pub fn corpus_words(file: &LweFile) -> Result<Vec<Vec<String>>> {
    Ok(word_records(file)?
        .iter()
        .map(|r| r.texts().filter_map(word_key).collect())
        .collect())
}

/// `ln(D / df(w))` over `D` sentences.
pub fn idf<S: AsRef<str>>(corpus: &[Vec<S>]) -> Result<BTreeMap<String, f64>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for sentence in corpus {
        let distinct: BTreeSet<&str> = sentence.iter().map(|w| w.as_ref()).collect();
        for w in distinct {
            *df.entry(w.to_owned()).or_default() += 1;
        }
    }
    let d = corpus.len() as f64;
    Ok(df
        .into_iter()
        .map(|(w, n)| (w, (d / n as f64).ln()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tertile {
    Low,
    Middle,
    High,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordVarianceEntry {
    pub word: String,
    pub mean_variance: f64,
    pub occurrences: usize,
    pub idf: f64,
    /// Rank tertile; tied variances share the tertile of their lowest rank.
    pub tertile: Tertile,
}

/// Mean offset-1 variance per word occurring at least `min_occurrences`
/// times, sorted by descending variance.
pub fn word_variance_table(
    file: &LweFile,
    min_occurrences: usize,
) -> Result<Vec<WordVarianceEntry>> {
    let records = word_records(file)?;
    let per_sentence = records
        .par_iter()
        .map(|r| {
            r.tokens
                .iter()
                .filter_map(|t| word_key(&t.text).map(|w| (w, &t.stack)))
                .map(|(w, s)| Ok((w, offset1_variance(&s.cast::<f64>())?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut by_word: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (w, v) in per_sentence.iter().flatten() {
        by_word.entry(w.clone()).or_default().push(*v);
    }
    if by_word.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let corpus: Vec<Vec<String>> = per_sentence
        .iter()
        .map(|s| s.iter().map(|(w, _)| w.clone()).collect())
        .collect();
    let idf = idf(&corpus)?;

    let mut entries: Vec<WordVarianceEntry> = by_word
        .into_iter()
        .filter(|(_, v)| v.len() >= min_occurrences.max(1))
        .map(|(word, mut v)| {
            // Summing in sorted order makes the mean independent of corpus order.
            v.sort_by(f64::total_cmp);
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            WordVarianceEntry {
                idf: idf[&word],
                word,
                mean_variance: mean,
                occurrences: v.len(),
                tertile: Tertile::Low,
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        b.mean_variance
            .total_cmp(&a.mean_variance)
            .then_with(|| a.word.cmp(&b.word))
    });
    assign_tertiles(&mut entries);
    Ok(entries)
}

/// Entries must be sorted by descending variance.
fn assign_tertiles(entries: &mut [WordVarianceEntry]) {
    let n = entries.len();
    let mut k = 0;
    while k < n {
        let mut end = k + 1;
        while end < n && entries[end].mean_variance == entries[k].mean_variance {
            end += 1;
        }
        // Ascending position of the lowest member of this tie group.
        let lowest = n - end;
        let tertile = match 3 * lowest / n {
            0 => Tertile::Low,
            1 => Tertile::Middle,
            _ => Tertile::High,
        };
        for e in &mut entries[k..end] {
            e.tertile = tertile;
        }
        k = end;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdfCorrelation {
    /// Spearman rank correlation between mean variance and IDF.
    pub rho: f64,
    /// Two-sided p-value; `None` below three entries.
    pub p: Option<f64>,
    pub n: usize,
}

pub fn variance_idf_correlation(entries: &[WordVarianceEntry]) -> Result<IdfCorrelation> {
    if entries.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: entries.len(),
        });
    }
    let var: Vec<f64> = entries.iter().map(|e| e.mean_variance).collect();
    let idf: Vec<f64> = entries.iter().map(|e| e.idf).collect();
    let rho = spearman(&var, &idf)?;
    Ok(IdfCorrelation {
        rho,
        p: correlation_p_value(rho, entries.len()),
        n: entries.len(),
    })
}
