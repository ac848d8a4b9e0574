use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use layerfuse::fusion::{embed_sentence_detailed, prepare_record, EmbeddedSentence, FusionConfig};
use layerfuse::ingest::EmbeddingFile;
use rayon::prelude::*;

use crate::manifest::RunManifest;

struct Embedded {
    texts: Vec<String>,
    sentence: EmbeddedSentence<f64>,
}

pub fn embed(
    input: &Path,
    output: &Path,
    dump_token_weights: Option<&Path>,
    cfg: &FusionConfig,
) -> anyhow::Result<()> {
    let mut run = RunManifest::new("embed");
    run.configs.push(*cfg);
    run.inputs.push(input.display().to_string());
    run.outputs.push(output.display().to_string());

    run.phase("read");
    let file = super::load(input)?;
    cfg.validate(file.layer_count)?;

    run.phase("embed");
    let embedded = file
        .records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let prepared = prepare_record::<f64>(r, cfg)
                .and_then(|p| {
                    Ok((
                        p.texts().map(String::from).collect(),
                        embed_sentence_detailed(&p, cfg)?,
                    ))
                })
                .with_context(|| format!("{}: sentence {i}", input.display()))?;
            Ok(Embedded {
                texts: prepared.0,
                sentence: prepared.1,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    run.phase("write");
    let rows: Vec<&[f64]> = embedded
        .iter()
        .map(|e| e.sentence.embedding.values.as_slice())
        .collect();
    EmbeddingFile::from_rows(file.dim, &rows)?
        .write(output)
        .with_context(|| format!("writing {}", output.display()))?;
    if let Some(path) = dump_token_weights {
        std::fs::write(path, token_weights_tsv(&embedded))
            .with_context(|| format!("writing {}", path.display()))?;
        run.outputs.push(path.display().to_string());
    }
    log::info!("embedded {} sentences", embedded.len());
    run.write(&RunManifest::path_for(output))
}

fn token_weights_tsv(embedded: &[Embedded]) -> String {
    let mut out = String::from("sentence\ttoken\ttext\tvariance\tweight\n");
    for (s, e) in embedded.iter().enumerate() {
        let imp = &e.sentence.importance;
        for (t, text) in e.texts.iter().enumerate() {
            let text = text.replace(['\t', '\n', '\r'], " ");
            let _ = writeln!(
                out,
                "{s}\t{t}\t{text}\t{}\t{}",
                imp.raw_variance[t], imp.weights[t]
            );
        }
    }
    out
}
