use std::path::PathBuf;

use anyhow::Context;
use layerfuse::ingest::write_lwe;
use layerfuse::synth::{gold_tsv, synth_corpus, synth_sts, SynthConfig};

use crate::manifest::RunManifest;

pub struct SynthArgs {
    pub output: PathBuf,
    pub pairs: Option<usize>,
    pub sentences: Option<usize>,
    pub gold: Option<PathBuf>,
    pub layers: usize,
    pub dim: usize,
    pub vocabulary: usize,
    pub seed: u64,
}

pub fn synth(a: &SynthArgs) -> anyhow::Result<()> {
    let cfg = SynthConfig {
        layer_count: a.layers,
        dim: a.dim,
        vocabulary: a.vocabulary,
        seed: a.seed,
        ..SynthConfig::default()
    };
    if cfg.layer_count < 2 || cfg.dim == 0 || cfg.vocabulary == 0 {
        return Err(super::UsageError(
            "--layers must be at least 2; --dim and --vocabulary at least 1".into(),
        )
        .into());
    }
    let mut run = RunManifest::new("synth");
    run.outputs.push(a.output.display().to_string());
    run.phase("generate");
    let file = match (a.pairs, a.sentences) {
        (Some(pairs), _) => {
            let (file, gold) = synth_sts(&cfg, pairs);
            let gold_path = a
                .gold
                .clone()
                .unwrap_or_else(|| a.output.with_extension("tsv"));
            std::fs::write(&gold_path, gold_tsv(&gold))
                .with_context(|| format!("writing {}", gold_path.display()))?;
            run.outputs.push(gold_path.display().to_string());
            file
        }
        (None, Some(n)) => synth_corpus(&cfg, n),
        (None, None) => unreachable!("clap requires --pairs or --sentences"),
    };
    run.phase("write");
    write_lwe(&file, &a.output).with_context(|| format!("writing {}", a.output.display()))?;
    run.write(&RunManifest::path_for(&a.output))
}
