use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use rewardmap_core::reward::SubstituteFlags;
use rewardmap_core::seed;

use crate::config::Config;
use crate::Invocation;

pub const MANIFEST: &str = "manifest.json";

/// A file and the FNV-1a digest of its bytes, as 16 hex digits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub fnv1a: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> anyhow::Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Self {
            path: path.to_owned(),
            fnv1a: digest(&bytes),
        })
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("{:016x}", seed::fnv1a(bytes))
}

/// Written once per output directory; enough to re-run the command exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub invocation: Invocation,
    pub config: Config,
    pub inputs: Vec<FileDigest>,
    /// Output file name (relative to the output directory) to digest.
    pub outputs: BTreeMap<String, String>,
    pub substitute_flags: SubstituteFlags,
}

impl RunManifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| crate::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}
