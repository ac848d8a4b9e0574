use std::path::Path;
use std::time::Instant;

use layerfuse::fusion::{embed_sentence, prepare_record, FusionConfig, NoveltyBackend};
use layerfuse::ingest::SentenceRecord;
use serde::Serialize;

use super::UsageError;
use crate::manifest::RunManifest;

#[derive(Debug, Serialize)]
struct BackendTiming {
    backend: NoveltyBackend,
    trials: usize,
    /// Mean over trials of the per-sentence fusion time.
    mean_ms: f64,
    std_ms: f64,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    run_manifest: String,
    sentences: usize,
    backends: Vec<BackendTiming>,
    qr_over_svd: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-sentence milliseconds for one pass over `records`, one sentence at a time.
fn one_trial(records: &[SentenceRecord<f64>], cfg: &FusionConfig) -> anyhow::Result<f64> {
    let mut total = 0.0;
    for r in records {
        let t = Instant::now();
        std::hint::black_box(embed_sentence(r, cfg)?);
        total += t.elapsed().as_secs_f64() * 1e3;
    }
    Ok(total / records.len() as f64)
}

pub fn bench(
    input: &Path,
    trials: usize,
    output: Option<&Path>,
    cfg: &FusionConfig,
) -> anyhow::Result<()> {
    if trials == 0 {
        return Err(UsageError("--trials must be at least 1".into()).into());
    }
    let mut run = RunManifest::new("bench");
    run.inputs.push(input.display().to_string());

    run.phase("read");
    let file = super::load(input)?;
    cfg.validate(file.layer_count)?;
    let records = file
        .records
        .iter()
        .map(|r| prepare_record::<f64>(r, cfg))
        .collect::<layerfuse::Result<Vec<_>>>()?;
    if records.is_empty() {
        return Err(layerfuse::Error::EmptyCorpus.into());
    }

    let mut backends = Vec::new();
    for backend in [NoveltyBackend::Qr, NoveltyBackend::Svd] {
        run.phase(&format!("fusion-{backend:?}").to_lowercase());
        let c = FusionConfig {
            novelty: backend,
            ..*cfg
        };
        run.configs.push(c);
        one_trial(&records[..1], &c)?;
        let per_trial = (0..trials)
            .map(|_| one_trial(&records, &c))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let (mean_ms, std_ms) = mean_std(&per_trial);
        backends.push(BackendTiming {
            backend,
            trials,
            mean_ms,
            std_ms,
        });
    }
    let report = BenchReport {
        run_manifest: output.map(RunManifest::reference).unwrap_or_default(),
        sentences: records.len(),
        qr_over_svd: backends[0].mean_ms / backends[1].mean_ms,
        backends,
    };
    for b in &report.backends {
        println!(
            "{:<4} {:>9.3} ms/sentence  ± {:.3} ms  ({} trials, {} sentences)",
            format!("{:?}", b.backend).to_lowercase(),
            b.mean_ms,
            b.std_ms,
            b.trials,
            report.sentences
        );
    }
    println!("qr/svd {:.3}", report.qr_over_svd);
    if let Some(path) = output {
        run.outputs.push(path.display().to_string());
        super::write_json(path, &report)?;
        run.write(&RunManifest::path_for(path))?;
    }
    Ok(())
}
