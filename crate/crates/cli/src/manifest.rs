use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce a run. Paths are relative to the output
/// directory so a replay elsewhere yields identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Fully resolved flags, without --out and --threads.
    pub argv: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, argv: Vec<String>, parameters: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").trim_end_matches("-cli").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            argv,
            parameters,
            seed,
            outputs: Vec::new(),
        }
    }

    pub fn read(path: &Path) -> anyhow::Result<String> {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

/// Writes each `(name, contents)` pair into `dir`, then the manifest.
pub fn write_run(dir: &Path, mut manifest: RunManifest, files: &[(String, String)]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        manifest.outputs.push(name.clone());
    }
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
