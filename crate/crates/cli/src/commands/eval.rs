use std::path::{Path, PathBuf};

use anyhow::Context;
use layerfuse::eval::{evaluate, parse_sts_tsv, StsDataset, StsReport};
use layerfuse::fusion::FusionConfig;
use serde::Serialize;

use super::UsageError;
use crate::args::{expand, Sweep};
use crate::manifest::RunManifest;

#[derive(Serialize)]
struct ReportFile<'a> {
    run_manifest: String,
    #[serde(flatten)]
    report: &'a StsReport,
}

#[derive(Serialize)]
struct SweepFile<'a> {
    run_manifest: String,
    runs: &'a [StsReport],
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn eval_sts(
    inputs: &[PathBuf],
    golds: &[PathBuf],
    output: &Path,
    sweeps: &[Sweep],
    cfg: &FusionConfig,
) -> anyhow::Result<()> {
    if inputs.len() != golds.len() {
        return Err(UsageError(format!(
            "{} --input files but {} --gold files",
            inputs.len(),
            golds.len()
        ))
        .into());
    }
    let configs = expand(*cfg, sweeps);
    let mut run = RunManifest::new("eval-sts");
    run.configs = configs.clone();
    run.inputs = inputs
        .iter()
        .chain(golds)
        .map(|p| p.display().to_string())
        .collect();
    run.outputs.push(output.display().to_string());

    run.phase("read");
    let mut files = Vec::with_capacity(inputs.len());
    for (input, gold) in inputs.iter().zip(golds) {
        let file = super::load(input)?;
        let rows = parse_sts_tsv(gold).with_context(|| format!("reading {}", gold.display()))?;
        files.push((dataset_name(input), file, rows));
    }
    for c in &configs {
        for (_, file, _) in &files {
            c.validate(file.layer_count)?;
        }
    }

    run.phase("evaluate");
    let datasets: Vec<StsDataset<'_>> = files
        .iter()
        .map(|(name, file, gold)| StsDataset {
            name: name.clone(),
            file,
            gold,
        })
        .collect();
    let reports = configs
        .iter()
        .map(|c| evaluate(&datasets, c).with_context(|| format!("evaluating {c:?}")))
        .collect::<anyhow::Result<Vec<_>>>()?;

    run.phase("write");
    let reference = RunManifest::reference(output);
    if sweeps.is_empty() {
        super::write_json(
            output,
            &ReportFile {
                run_manifest: reference,
                report: &reports[0],
            },
        )?;
    } else {
        super::write_json(
            output,
            &SweepFile {
                run_manifest: reference,
                runs: &reports,
            },
        )?;
    }
    print_table(&reports);
    run.write(&RunManifest::path_for(output))
}

fn print_table(reports: &[StsReport]) {
    println!(
        "{:<20} {:>6} {:>6} {:>6} {:>8} {:>8} {:>6}",
        "dataset", "omega", "window", "start", "pearson", "spearman", "n"
    );
    for r in reports {
        let c = &r.config;
        for d in r.datasets.iter().chain(&r.mean) {
            println!(
                "{:<20} {:>6} {:>6} {:>6} {:>8.2} {:>8.2} {:>6}",
                d.dataset, c.omega, c.window, c.start_layer, d.pearson, d.spearman, d.n
            );
        }
    }
}
