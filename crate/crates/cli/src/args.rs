use clap::{Args, ValueEnum};
use layerfuse::fusion::{FusionConfig, ImportanceMode, NoveltyBackend};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Novelty {
    Qr,
    Svd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Importance {
    Variance,
    LastLayer,
    Uniform,
}

#[derive(Debug, Clone, Args)]
pub struct FusionArgs {
    /// Weight of inverse alignment against novelty, in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub omega: f64,
    /// Neighbor half-window.
    #[arg(long, default_value_t = 2)]
    pub window: usize,
    /// First layer included in fusion.
    #[arg(long, default_value_t = 4)]
    pub start_layer: usize,
    #[arg(long, value_enum, default_value = "qr")]
    pub novelty: Novelty,
    #[arg(long, value_enum, default_value = "variance")]
    pub importance: Importance,
    /// Average word pieces into whole words before fusion.
    #[arg(long)]
    pub merge_subwords: bool,
    /// Keep special tokens such as [CLS] and [SEP].
    #[arg(long)]
    pub keep_special: bool,
}

impl FusionArgs {
    pub fn config(&self) -> FusionConfig {
        FusionConfig {
            omega: self.omega,
            window: self.window,
            start_layer: self.start_layer,
            novelty: match self.novelty {
                Novelty::Qr => NoveltyBackend::Qr,
                Novelty::Svd => NoveltyBackend::Svd,
            },
            importance: match self.importance {
                Importance::Variance => ImportanceMode::Variance,
                Importance::LastLayer => ImportanceMode::LastLayer,
                Importance::Uniform => ImportanceMode::Uniform,
            },
            merge_subwords: self.merge_subwords,
            keep_special: self.keep_special,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    Omega(Vec<f64>),
    Window(Vec<usize>),
    StartLayer(Vec<usize>),
}

fn int_values(spec: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a
                .trim()
                .parse()
                .map_err(|_| format!("bad range start in {part:?}"))?;
            let b: usize = b
                .trim()
                .parse()
                .map_err(|_| format!("bad range end in {part:?}"))?;
            if a > b {
                return Err(format!("empty range {part:?}"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad integer {part:?}"))?);
        }
    }
    Ok(out)
}

/// Parses `omega=0,0.5,1`, `window=1..4` or `start-layer=0..6`.
pub fn parse_sweep(s: &str) -> Result<Sweep, String> {
    let (key, values) = s
        .split_once('=')
        .ok_or_else(|| format!("expected AXIS=VALUES, got {s:?}"))?;
    match key.trim() {
        "omega" => values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad omega {v:?}"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Sweep::Omega),
        "window" => int_values(values).map(Sweep::Window),
        "start-layer" | "start_layer" => int_values(values).map(Sweep::StartLayer),
        other => Err(format!(
            "unknown sweep axis {other:?} (omega, window, start-layer)"
        )),
    }
}

/// Cartesian product of the sweeps applied to `base`, in flag order with the
/// last sweep varying fastest.
pub fn expand(base: FusionConfig, sweeps: &[Sweep]) -> Vec<FusionConfig> {
    let mut configs = vec![base];
    for sweep in sweeps {
        configs = configs
            .into_iter()
            .flat_map(|c| match sweep {
                Sweep::Omega(v) => v
                    .iter()
                    .map(|&x| FusionConfig { omega: x, ..c })
                    .collect::<Vec<_>>(),
                Sweep::Window(v) => v.iter().map(|&x| FusionConfig { window: x, ..c }).collect(),
                Sweep::StartLayer(v) => v
                    .iter()
                    .map(|&x| FusionConfig {
                        start_layer: x,
                        ..c
                    })
                    .collect(),
            })
            .collect();
    }
    configs
}
