use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use layerfuse::fusion::FusionConfig;
use serde::Serialize;

/// Provenance written next to every result: `<output>.run.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub configs: Vec<FusionConfig>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub threads: usize,
    /// Wall-clock milliseconds per phase.
    pub timings_ms: BTreeMap<String, f64>,
    #[serde(skip)]
    clock: Option<(String, Instant)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: "layerfuse",
            version: layerfuse::VERSION,
            command: command.to_string(),
            configs: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            threads: rayon::current_num_threads(),
            timings_ms: BTreeMap::new(),
            clock: None,
        }
    }

    /// Starts timing `phase`, closing the previous one.
    pub fn phase(&mut self, phase: &str) {
        self.stop();
        self.clock = Some((phase.to_string(), Instant::now()));
    }

    fn stop(&mut self) {
        if let Some((name, t)) = self.clock.take() {
            *self.timings_ms.entry(name).or_default() += t.elapsed().as_secs_f64() * 1e3;
        }
    }

    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".run.json");
        PathBuf::from(s)
    }

    /// File name of the manifest for `output`, as referenced from results.
    pub fn reference(output: &Path) -> String {
        Self::path_for(output)
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    pub fn write(mut self, path: &Path) -> anyhow::Result<()> {
        self.stop();
        let text = serde_json::to_string_pretty(&self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
