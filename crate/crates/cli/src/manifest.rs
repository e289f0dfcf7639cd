use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::args::Command;
use crate::error::CliError;

pub const CODE_VERSION: &str = concat!("perclab ", env!("CARGO_PKG_VERSION"));

/// Everything needed to re-run an experiment and check its outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Command,
    pub seed: u64,
    pub version: String,
    /// Informational; results do not depend on it.
    pub threads: Option<usize>,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    /// File names relative to the manifest's directory.
    pub outputs: Vec<PathBuf>,
    /// Summary statistics in round-trip formatting.
    pub summary: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<RunManifest, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::ManifestCorrupt(format!("{}: {e}", path.display())))?;
        let m: RunManifest = serde_json::from_str(&text).map_err(|e| CliError::ManifestCorrupt(format!("{}: {e}", path.display())))?;
        if m.params.name() != m.command || matches!(m.params, Command::Replay(_)) {
            return Err(CliError::ManifestCorrupt(format!("command {:?} does not match its parameters", m.command)));
        }
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self).map_err(|e| CliError::ManifestCorrupt(e.to_string()))?;
        write_atomic(path, json.as_bytes())
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}
