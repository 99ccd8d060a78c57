pub mod curves;
pub mod genmap;
pub mod genqa;
pub mod score;
pub mod train;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use rewardmap_core::qa::{read_jsonl, QAItem};
use rewardmap_core::transit::{load_network, NetworkRegistry};

use crate::Usage;

/// Files a command produced, keyed by path relative to the output directory.
#[derive(Debug, Default)]
pub struct Output {
    pub files: BTreeMap<String, Vec<u8>>,
    pub inputs: Vec<PathBuf>,
    pub row_errors: usize,
}

impl Output {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), bytes.into());
    }

    pub fn add_json(&mut self, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
        let mut json = serde_json::to_string_pretty(value)?;
        json.push('\n');
        self.add(name, json);
        Ok(())
    }
}

/// Read an input file; a missing or unreadable file is a usage error.
pub fn read_input(path: &Path, inputs: &mut Vec<PathBuf>) -> anyhow::Result<String> {
    let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
    inputs.push(path.to_owned());
    Ok(text)
}

pub fn read_dataset(path: &Path, inputs: &mut Vec<PathBuf>) -> anyhow::Result<Vec<QAItem>> {
    let text = read_input(path, inputs)?;
    read_jsonl(&text).with_context(|| format!("dataset {}", path.display()))
}

/// Load every `*.json` network in `dir`, in file-name order.
pub fn read_networks(dir: &Path, inputs: &mut Vec<PathBuf>) -> anyhow::Result<NetworkRegistry> {
    let entries =
        std::fs::read_dir(dir).map_err(|e| Usage(format!("cannot read networks in {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x == "json"));
    paths.sort();
    if paths.is_empty() {
        return Err(Usage(format!("no network files in {}", dir.display())).into());
    }
    let mut nets = NetworkRegistry::new();
    for path in paths {
        let text = read_input(&path, inputs)?;
        let net = load_network(&text).with_context(|| format!("network {}", path.display()))?;
        if let Some(dup) = nets.insert(net) {
            anyhow::bail!("network id `{}` appears twice", dup.network_id());
        }
    }
    Ok(nets)
}
