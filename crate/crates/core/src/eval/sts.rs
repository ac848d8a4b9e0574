use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::stats::{pearson, spearman};
use crate::fusion::{embed_sentence, prepare_record, FusionConfig};
use crate::ingest::LweFile;
use crate::linalg::cosine_similarity;

pub const MAX_GOLD: f64 = 5.0;

/// One gold line: relatedness score and the two sentence texts.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldRow {
    pub gold: f64,
    pub sentence_a: String,
    pub sentence_b: String,
    /// 1-based line number in the source file.
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StsPair {
    pub sentence_a_index: usize,
    pub sentence_b_index: usize,
    pub gold: f64,
}

/// Parses a tab-separated gold file.
///
/// Lines with seven or more fields follow the STS Benchmark layout (genre,
/// file, year, index, score, sentence1, sentence2, then ignored extras);
/// lines with exactly three fields are the normalized `score, s1, s2` form.
/// Blank lines are skipped.
pub fn parse_sts_tsv(path: impl AsRef<Path>) -> Result<Vec<GoldRow>> {
    parse_sts_str(&fs::read_to_string(path)?)
}

pub fn parse_sts_str(text: &str) -> Result<Vec<GoldRow>> {
    let mut rows = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let (score, a, b) = match fields.len() {
            3 => (fields[0], fields[1], fields[2]),
            n if n >= 7 => (fields[4], fields[5], fields[6]),
            n => {
                return Err(Error::MalformedLine {
                    line,
                    reason: format!("expected 3 or at least 7 tab-separated fields, got {n}"),
                })
            }
        };
        let gold: f64 = score.trim().parse().map_err(|_| Error::MalformedLine {
            line,
            reason: format!("score {score:?} is not a number"),
        })?;
        if !(0.0..=MAX_GOLD).contains(&gold) {
            return Err(Error::MalformedLine {
                line,
                reason: format!("score {gold} outside [0, {MAX_GOLD}]"),
            });
        }
        rows.push(GoldRow {
            gold,
            sentence_a: a.to_owned(),
            sentence_b: b.to_owned(),
            line,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile);
    }
    Ok(rows)
}

/// Pairs gold rows with LWE sentences: row `k` uses sentences `2k` and
/// `2k + 1`.
pub fn interleaved_pairs(gold: &[GoldRow], sentence_count: usize) -> Result<Vec<StsPair>> {
    if sentence_count != 2 * gold.len() {
        return Err(Error::Mismatch(format!(
            "{} gold pairs need {} sentences, the embedding file has {sentence_count}",
            gold.len(),
            2 * gold.len()
        )));
    }
    Ok(gold
        .iter()
        .enumerate()
        .map(|(k, g)| StsPair {
            sentence_a_index: 2 * k,
            sentence_b_index: 2 * k + 1,
            gold: g.gold,
        })
        .collect())
}

/// Cosine similarity between the embeddings of each pair.
pub fn score_pairs(file: &LweFile, pairs: &[StsPair], cfg: &FusionConfig) -> Result<Vec<f64>> {
    let s = file.records.len();
    for p in pairs {
        for idx in [p.sentence_a_index, p.sentence_b_index] {
            if idx >= s {
                return Err(Error::Mismatch(format!(
                    "pair references sentence {idx}, file has {s}"
                )));
            }
        }
        if !(0.0..=MAX_GOLD).contains(&p.gold) {
            return Err(Error::Mismatch(format!(
                "gold score {} outside [0, 5]",
                p.gold
            )));
        }
    }
    let needed: Vec<usize> = pairs
        .iter()
        .flat_map(|p| [p.sentence_a_index, p.sentence_b_index])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let embedded: Vec<Option<Vec<f64>>> = {
        let computed = needed
            .par_iter()
            .map(|&i| {
                let r = prepare_record::<f64>(&file.records[i], cfg)?;
                Ok((i, embed_sentence(&r, cfg)?.values.into_inner()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut slots = vec![None; s];
        for (i, v) in computed {
            slots[i] = Some(v);
        }
        slots
    };
    pairs
        .iter()
        .map(|p| {
            let a = embedded[p.sentence_a_index].as_ref().unwrap();
            let b = embedded[p.sentence_b_index].as_ref().unwrap();
            cosine_similarity(a, b)
        })
        .collect()
}

/// Correlation between predicted scores and gold labels for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub dataset: String,
    pub n: usize,
    pub pearson: f64,
    pub spearman: f64,
}

impl CorrelationReport {
    pub fn compute(dataset: impl Into<String>, predicted: &[f64], gold: &[f64]) -> Result<Self> {
        Ok(Self {
            dataset: dataset.into(),
            n: predicted.len(),
            pearson: pearson(predicted, gold)?,
            spearman: spearman(predicted, gold)?,
        })
    }

    /// Unweighted mean over several datasets.
    pub fn mean(label: impl Into<String>, reports: &[CorrelationReport]) -> Option<Self> {
        if reports.is_empty() {
            return None;
        }
        let k = reports.len() as f64;
        Some(Self {
            dataset: label.into(),
            n: reports.iter().map(|r| r.n).sum(),
            pearson: reports.iter().map(|r| r.pearson).sum::<f64>() / k,
            spearman: reports.iter().map(|r| r.spearman).sum::<f64>() / k,
        })
    }
}

/// Scales a correlation by 100 and rounds to two decimals.
pub fn percent2(x: f64) -> f64 {
    (x * 10_000.0).round() / 100.0
}

/// JSON form: correlations ×100 with two decimals, plus the raw values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationJson {
    pub dataset: String,
    pub n: usize,
    pub pearson: f64,
    pub spearman: f64,
    pub pearson_raw: f64,
    pub spearman_raw: f64,
}

impl From<&CorrelationReport> for CorrelationJson {
    fn from(r: &CorrelationReport) -> Self {
        Self {
            dataset: r.dataset.clone(),
            n: r.n,
            pearson: percent2(r.pearson),
            spearman: percent2(r.spearman),
            pearson_raw: r.pearson,
            spearman_raw: r.spearman,
        }
    }
}

/// Full evaluation report for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StsReport {
    pub config: FusionConfig,
    pub datasets: Vec<CorrelationJson>,
    /// Unweighted mean over datasets when there is more than one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<CorrelationJson>,
}

/// A labeled dataset: embeddings plus gold rows in pairing order.
pub struct StsDataset<'a> {
    pub name: String,
    pub file: &'a LweFile,
    pub gold: &'a [GoldRow],
}

pub fn evaluate(datasets: &[StsDataset<'_>], cfg: &FusionConfig) -> Result<StsReport> {
    let mut reports = Vec::with_capacity(datasets.len());
    for d in datasets {
        let pairs = interleaved_pairs(d.gold, d.file.sentence_count())?;
        let predicted = score_pairs(d.file, &pairs, cfg)?;
        let gold: Vec<f64> = pairs.iter().map(|p| p.gold).collect();
        reports.push(CorrelationReport::compute(
            d.name.clone(),
            &predicted,
            &gold,
        )?);
    }
    let mean = if reports.len() > 1 {
        CorrelationReport::mean("mean", &reports).map(|r| CorrelationJson::from(&r))
    } else {
        None
    };
    Ok(StsReport {
        config: *cfg,
        datasets: reports.iter().map(CorrelationJson::from).collect(),
        mean,
    })
}
