#![allow(dead_code)]

use layerfuse::fusion::FusionConfig;
use layerfuse::ingest::{LayerStack, SentenceRecord, Token, TokenFlags};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Layers drift from a random start by steps of random size.
pub fn walk_stack(rng: &mut ChaCha8Rng, layers: usize, dim: usize) -> LayerStack<f64> {
    let step: f64 = rng.random_range(0.05..1.5);
    let mut cur = gaussian(rng, dim);
    let mut out = Vec::with_capacity(layers);
    for _ in 0..layers {
        out.push(cur.clone());
        let s = step * rng.random_range(0.2..2.0);
        for c in cur.iter_mut() {
            *c += s * rng.sample::<f64, _>(StandardNormal);
        }
    }
    LayerStack::from_layers(&out).unwrap()
}

/// Independent Gaussian layers (alignment often near or below zero).
pub fn iid_stack(rng: &mut ChaCha8Rng, layers: usize, dim: usize) -> LayerStack<f64> {
    let out: Vec<Vec<f64>> = (0..layers).map(|_| gaussian(rng, dim)).collect();
    LayerStack::from_layers(&out).unwrap()
}

/// Walk stack where some layers repeat (or positively rescale) the previous
/// one, making neighbor matrices rank deficient.
pub fn duplicated_stack(rng: &mut ChaCha8Rng, layers: usize, dim: usize) -> LayerStack<f64> {
    let base = walk_stack(rng, layers, dim);
    let mut out: Vec<Vec<f64>> = base.layers().map(|l| l.to_vec()).collect();
    for i in 1..layers {
        if rng.random_bool(0.35) {
            let k = if rng.random_bool(0.5) {
                1.0
            } else {
                rng.random_range(0.5..3.0)
            };
            out[i] = out[i - 1].iter().map(|x| k * x).collect();
        }
    }
    LayerStack::from_layers(&out).unwrap()
}

pub fn any_stack(rng: &mut ChaCha8Rng, layers: usize, dim: usize) -> LayerStack<f64> {
    match rng.random_range(0..4) {
        0 => iid_stack(rng, layers, dim),
        1 => duplicated_stack(rng, layers, dim),
        _ => walk_stack(rng, layers, dim),
    }
}

pub fn record_of(stacks: Vec<LayerStack<f64>>) -> SentenceRecord<f64> {
    SentenceRecord {
        tokens: stacks
            .into_iter()
            .enumerate()
            .map(|(i, stack)| Token {
                text: format!("t{i}"),
                flags: TokenFlags::WORD,
                stack,
            })
            .collect(),
        source_index: 0,
    }
}

/// Straight-line reimplementation of the method, written from the equations
/// without the crate's linear-algebra kernels: projections use the normal
/// equations solved by Gaussian elimination, variance the two-pass formula.
pub mod oracle {
    use super::*;

    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..a.len() {
            s += a[i] * b[i];
        }
        s
    }

    pub fn cos(a: &[f64], b: &[f64]) -> f64 {
        let c = dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt());
        c.clamp(-1.0, 1.0)
    }

    fn neighbors(i: usize, m: usize, ls: usize, last: usize) -> Vec<usize> {
        let mut v = Vec::new();
        let lo = i.saturating_sub(m);
        for j in lo.max(ls)..=(i + m).min(last) {
            if j != i {
                v.push(j);
            }
        }
        v
    }

    /// Solves `G x = b` by Gaussian elimination with partial pivoting.
    fn solve(mut g: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let mut p = col;
            for r in col + 1..n {
                if g[r][col].abs() > g[p][col].abs() {
                    p = r;
                }
            }
            g.swap(col, p);
            b.swap(col, p);
            for r in col + 1..n {
                let f = g[r][col] / g[col][col];
                let pivot = g[col].clone();
                for (x, p) in g[r][col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let mut s = b[r];
            for c in r + 1..n {
                s -= g[r][c] * x[c];
            }
            x[r] = s / g[r][r];
        }
        x
    }

    /// `‖v - C (CᵀC)⁻¹ Cᵀ v‖ / ‖v‖` for full-column-rank `C`.
    pub fn novelty(v: &[f64], cols: &[&[f64]]) -> f64 {
        let k = cols.len();
        let g: Vec<Vec<f64>> = (0..k)
            .map(|a| (0..k).map(|b| dot(cols[a], cols[b])).collect())
            .collect();
        let rhs: Vec<f64> = cols.iter().map(|c| dot(c, v)).collect();
        let x = solve(g, rhs);
        let mut q = v.to_vec();
        for (c, xi) in cols.iter().zip(&x) {
            for d in 0..q.len() {
                q[d] -= xi * c[d];
            }
        }
        let s = (dot(&q, &q).sqrt() / dot(v, v).sqrt()).min(1.0);
        if s < 1e-10 {
            0.0
        } else {
            s
        }
    }

    fn normalized_or_uniform(xs: Vec<f64>) -> Vec<f64> {
        let t: f64 = xs.iter().sum();
        if t > 0.0 {
            xs.iter().map(|x| x / t).collect()
        } else {
            vec![1.0 / xs.len() as f64; xs.len()]
        }
    }

    pub struct Weights {
        pub alignment: Vec<f64>,
        pub novelty: Vec<f64>,
        pub combined: Vec<f64>,
    }

    pub fn weights(layers: &[Vec<f64>], cfg: &FusionConfig) -> Weights {
        let last = layers.len() - 1;
        let ls = cfg.start_layer;
        if ls == last {
            return Weights {
                alignment: vec![1.0],
                novelty: vec![1.0],
                combined: vec![1.0],
            };
        }
        let mut inv_beta = Vec::new();
        let mut nov = Vec::new();
        for i in ls..=last {
            let nb = neighbors(i, cfg.window, ls, last);
            let beta =
                nb.iter().map(|&j| cos(&layers[i], &layers[j])).sum::<f64>() / nb.len() as f64;
            inv_beta.push(1.0 / beta.max(1e-3));
            let cols: Vec<&[f64]> = nb.iter().map(|&j| layers[j].as_slice()).collect();
            nov.push(novelty(&layers[i], &cols));
        }
        let alignment = normalized_or_uniform(inv_beta);
        let novelty = normalized_or_uniform(nov);
        let w = cfg.omega;
        let combined = alignment
            .iter()
            .zip(&novelty)
            .map(|(a, n)| w * a + (1.0 - w) * n)
            .collect();
        Weights {
            alignment,
            novelty,
            combined,
        }
    }

    pub fn variance(layers: &[Vec<f64>]) -> f64 {
        let d: Vec<f64> = (0..layers.len() - 1)
            .map(|i| cos(&layers[i], &layers[i + 1]))
            .collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / d.len() as f64
    }

    pub fn embed(tokens: &[Vec<Vec<f64>>], cfg: &FusionConfig) -> Vec<f64> {
        let dim = tokens[0][0].len();
        let var: Vec<f64> = tokens.iter().map(|t| variance(t)).collect();
        let omega = normalized_or_uniform(var);
        let mut out = vec![0.0; dim];
        for (t, wj) in tokens.iter().zip(&omega) {
            let w = weights(t, cfg);
            for (k, a) in w.combined.iter().enumerate() {
                let layer = &t[cfg.start_layer + k];
                for d in 0..dim {
                    out[d] += wj * a * layer[d];
                }
            }
        }
        out
    }
}
