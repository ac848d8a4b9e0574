//! Deterministic synthetic layer-wise embeddings for fixtures and benchmarks.
//!
//! Every token is a vocabulary word with a fixed base direction. Its layer
//! vectors follow a random walk away from that base, with larger steps in
//! the first and last layers and a per-word volatility, plus a per-sentence
//! context direction. Paired sentences share words in proportion to their
//! gold score, so cosine scores correlate with gold.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::eval::GoldRow;
use crate::ingest::{LayerStack, LweFile, LweManifest, SentenceRecord, Token, TokenFlags};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub layer_count: usize,
    pub dim: usize,
    pub vocabulary: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Wrap each sentence in `[CLS]` ... `[SEP]`.
    pub specials: bool,
    /// Probability that a word is emitted as two word pieces.
    pub split_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            layer_count: 13,
            dim: 768,
            vocabulary: 200,
            min_tokens: 5,
            max_tokens: 20,
            specials: true,
            split_rate: 0.1,
            seed: 0,
        }
    }
}

struct Vocabulary {
    bases: Vec<Vec<f32>>,
    volatility: Vec<f32>,
    names: Vec<String>,
}

const SYLLABLES: [&str; 16] = [
    "ka", "lo", "mi", "ren", "tu", "sa", "vo", "ne", "di", "pra", "gu", "te", "bo", "zin", "ha",
    "el",
];

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    (0..dim)
        .map(|_| rng.sample::<f32, _>(StandardNormal))
        .collect()
}

impl Vocabulary {
    fn new(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Self {
        let mut names = Vec::with_capacity(cfg.vocabulary);
        for k in 0..cfg.vocabulary {
            let mut name = String::new();
            let mut x = k;
            loop {
                name.push_str(SYLLABLES[x % SYLLABLES.len()]);
                x /= SYLLABLES.len();
                if x == 0 {
                    break;
                }
            }
            names.push(name);
        }
        Self {
            bases: (0..cfg.vocabulary)
                .map(|_| gaussian(rng, cfg.dim))
                .collect(),
            volatility: (0..cfg.vocabulary)
                .map(|_| rng.random_range(0.05_f32..0.6))
                .collect(),
            names,
        }
    }
}

/// Layer step size profile: large at the edges, flat in the middle.
fn step_scale(layer: usize, last: usize) -> f32 {
    if layer <= 2 || layer + 2 >= last {
        1.0
    } else {
        0.35
    }
}

fn word_stack(
    cfg: &SynthConfig,
    vocab: &Vocabulary,
    word: usize,
    context: &[f32],
    rng: &mut ChaCha8Rng,
) -> LayerStack<f32> {
    let (layers, dim) = (cfg.layer_count, cfg.dim);
    let mut data = Vec::with_capacity(layers * dim);
    let mut current = vocab.bases[word].clone();
    let vol = vocab.volatility[word];
    for l in 0..layers {
        if l > 0 {
            let s = vol * step_scale(l, layers - 1);
            for (k, c) in current.iter_mut().enumerate() {
                let noise: f32 = rng.sample(StandardNormal);
                *c += s * (noise + 0.5 * context[k]);
            }
        }
        data.extend_from_slice(&current);
    }
    LayerStack::new(layers, dim, data).expect("shape is consistent")
}

fn special_stack(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> LayerStack<f32> {
    let base = gaussian(rng, cfg.dim);
    let data = (0..cfg.layer_count)
        .flat_map(|l| base.iter().map(move |&x| x * (1.0 + 0.01 * l as f32)))
        .collect();
    LayerStack::new(cfg.layer_count, cfg.dim, data).unwrap()
}

fn sentence(
    cfg: &SynthConfig,
    vocab: &Vocabulary,
    words: &[usize],
    index: usize,
    rng: &mut ChaCha8Rng,
) -> SentenceRecord<f32> {
    let context = gaussian(rng, cfg.dim);
    let mut tokens = Vec::with_capacity(words.len() + 2);
    if cfg.specials {
        tokens.push(Token {
            text: "[CLS]".into(),
            flags: TokenFlags::SPECIAL,
            stack: special_stack(cfg, rng),
        });
    }
    for &w in words {
        let stack = word_stack(cfg, vocab, w, &context, rng);
        let name = &vocab.names[w];
        if name.len() >= 4 && rng.random_bool(cfg.split_rate) {
            let cut = name.len() / 2;
            tokens.push(Token {
                text: name[..cut].to_owned(),
                flags: TokenFlags::WORD,
                stack: stack.clone(),
            });
            let tail = word_stack(cfg, vocab, w, &context, rng);
            tokens.push(Token {
                text: format!("##{}", &name[cut..]),
                flags: TokenFlags::CONTINUATION,
                stack: tail,
            });
        } else {
            tokens.push(Token {
                text: name.clone(),
                flags: TokenFlags::WORD,
                stack,
            });
        }
    }
    if cfg.specials {
        tokens.push(Token {
            text: "[SEP]".into(),
            flags: TokenFlags::SPECIAL,
            stack: special_stack(cfg, rng),
        });
    }
    SentenceRecord {
        tokens,
        source_index: index,
    }
}

fn pick_words(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = rng.random_range(cfg.min_tokens..=cfg.max_tokens.max(cfg.min_tokens));
    // Zipf-like skew so that some words recur often.
    (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(0.0..1.0);
            ((cfg.vocabulary as f64).powf(u) - 1.0) as usize % cfg.vocabulary
        })
        .collect()
}

fn manifest(cfg: &SynthConfig) -> LweManifest {
    let mut m = LweManifest {
        model: Some("synthetic-random-walk".into()),
        tokenizer: Some("synthetic-wordpiece".into()),
        ..Default::default()
    };
    m.extra.insert("seed".into(), cfg.seed.into());
    m
}

/// `count` independent sentences.
pub fn synth_corpus(cfg: &SynthConfig, count: usize) -> LweFile {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = Vocabulary::new(cfg, &mut rng);
    let records = (0..count)
        .map(|i| {
            let words = pick_words(cfg, &mut rng);
            sentence(cfg, &vocab, &words, i, &mut rng)
        })
        .collect();
    LweFile {
        layer_count: cfg.layer_count,
        dim: cfg.dim,
        records,
        manifest: Some(manifest(cfg)),
    }
}

/// `pairs` sentence pairs in interleaved order (pair `k` is sentences `2k`
/// and `2k + 1`) with gold scores on the 0-5 scale.
pub fn synth_sts(cfg: &SynthConfig, pairs: usize) -> (LweFile, Vec<GoldRow>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = Vocabulary::new(cfg, &mut rng);
    let mut records = Vec::with_capacity(2 * pairs);
    let mut gold = Vec::with_capacity(pairs);
    for k in 0..pairs {
        let a = pick_words(cfg, &mut rng);
        let keep: f64 = rng.random_range(0.0..1.0);
        let mut b: Vec<usize> = a
            .iter()
            .map(|&w| {
                if rng.random_bool(keep) {
                    w
                } else {
                    rng.random_range(0..cfg.vocabulary)
                }
            })
            .collect();
        b.shuffle(&mut rng);
        let score = (5.0 * keep + rng.random_range(-0.4..0.4)).clamp(0.0, 5.0);
        let score = (score * 100.0).round() / 100.0;
        let name = |ws: &[usize]| {
            ws.iter()
                .map(|&w| vocab.names[w].as_str())
                .collect::<Vec<_>>()
                .join(" ")
        };
        gold.push(GoldRow {
            gold: score,
            sentence_a: name(&a),
            sentence_b: name(&b),
            line: k + 1,
        });
        records.push(sentence(cfg, &vocab, &a, 2 * k, &mut rng));
        records.push(sentence(cfg, &vocab, &b, 2 * k + 1, &mut rng));
    }
    (
        LweFile {
            layer_count: cfg.layer_count,
            dim: cfg.dim,
            records,
            manifest: Some(manifest(cfg)),
        },
        gold,
    )
}

/// Gold rows in the three-column `score, s1, s2` form.
pub fn gold_tsv(rows: &[GoldRow]) -> String {
    rows.iter()
        .map(|r| format!("{}\t{}\t{}\n", r.gold, r.sentence_a, r.sentence_b))
        .collect()
}
