mod analyze;
mod bench;
mod embed;
mod eval;
mod synth;

use std::fmt;
use std::path::Path;

use anyhow::Context;
use layerfuse::ingest::{read_lwe, LweFile};

pub use analyze::analyze;
pub use bench::bench;
pub use embed::embed;
pub use eval::eval_sts;
pub use synth::{synth, SynthArgs};

/// Invalid combination of otherwise well-formed arguments.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn load(path: &Path) -> anyhow::Result<LweFile> {
    read_lwe(path).with_context(|| format!("reading {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
