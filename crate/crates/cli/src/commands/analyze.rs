use std::path::Path;

use anyhow::Context;
use layerfuse::analysis::{
    average_similarity_map, offset_diagonal, variance_idf_correlation, word_variance_table,
    IdfCorrelation, Tertile,
};
use serde::Serialize;

use crate::manifest::RunManifest;

#[derive(Serialize)]
struct CorrelationFile {
    run_manifest: &'static str,
    #[serde(flatten)]
    correlation: IdfCorrelation,
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

pub fn analyze(input: &Path, dir: &Path, min_occurrences: usize) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut run = RunManifest::new("analyze");
    run.inputs.push(input.display().to_string());

    run.phase("read");
    let file = super::load(input)?;

    run.phase("similarity");
    let map = average_similarity_map(&file)?;
    let n = map.matrix.rows();
    let path = dir.join("similarity.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec!["layer".to_string()];
    header.extend((0..n).map(|j| j.to_string()));
    w.write_record(&header)?;
    for i in 0..n {
        let mut row = vec![i.to_string()];
        row.extend((0..n).map(|j| map.matrix.get(i, j).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    run.outputs.push(path.display().to_string());

    let path = dir.join("offsets.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["offset", "layer", "similarity"])?;
    for k in 1..n {
        for (i, v) in offset_diagonal(&map.matrix, k)?.into_iter().enumerate() {
            w.write_record([k.to_string(), i.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    run.outputs.push(path.display().to_string());

    run.phase("word-variance");
    let table = word_variance_table(&file, min_occurrences)?;
    let path = dir.join("word_variance.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "rank",
        "word",
        "mean_variance",
        "occurrences",
        "idf",
        "tertile",
    ])?;
    for (rank, e) in table.iter().enumerate() {
        let tertile = match e.tertile {
            Tertile::Low => "low",
            Tertile::Middle => "middle",
            Tertile::High => "high",
        };
        w.write_record([
            (rank + 1).to_string(),
            e.word.clone(),
            e.mean_variance.to_string(),
            e.occurrences.to_string(),
            e.idf.to_string(),
            tertile.to_string(),
        ])?;
    }
    w.flush()?;
    run.outputs.push(path.display().to_string());

    let path = dir.join("idf_correlation.json");
    let correlation = variance_idf_correlation(&table).with_context(|| {
        format!(
            "{} words with at least {min_occurrences} occurrences",
            table.len()
        )
    })?;
    super::write_json(
        &path,
        &CorrelationFile {
            run_manifest: "run.json",
            correlation,
        },
    )?;
    run.outputs.push(path.display().to_string());
    println!(
        "{} token occurrences, {} words; variance/IDF spearman {:.4} (p = {:?}, n = {})",
        map.word_count,
        table.len(),
        correlation.rho,
        correlation.p,
        correlation.n
    );
    run.write(&dir.join("run.json"))
}
