//! Run manifests and atomic output writing. Every command leaves exactly
//! one manifest next to (or inside) its output recording what ran, with
//! what configuration, over which input hashes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    /// Input path -> SHA-256 of the file contents.
    pub inputs: BTreeMap<String, String>,
    pub wall_ms: u128,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            inputs: BTreeMap::new(),
            wall_ms: 0,
        }
    }

    pub fn record_input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.insert(path.display().to_string(), hex);
        Ok(())
    }

    /// Write the manifest: `run_manifest.json` inside a directory output,
    /// `<file>.run_manifest.json` beside a file output.
    pub fn write(&self, out: &Path, wall_ms: u128) -> Result<(), CliError> {
        let mut manifest = serde_json::to_value(self).expect("manifest serializes");
        manifest["wall_ms"] = serde_json::json!(wall_ms);
        let target = if out.is_dir() {
            out.join("run_manifest.json")
        } else {
            let name = out
                .file_name()
                .map(|n| format!("{}.run_manifest.json", n.to_string_lossy()))
                .unwrap_or_else(|| "run_manifest.json".to_string());
            out.with_file_name(name)
        };
        atomic_write(
            &target,
            serde_json::to_string_pretty(&manifest).expect("serializes").as_bytes(),
        )
    }
}

/// Write through a temp file in the target directory and rename into place.
pub fn atomic_write(target: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = target.parent().filter(|p| !p.as_os_str().is_empty());
    let dir: PathBuf = dir.map(Path::to_path_buf).unwrap_or_else(|| ".".into());
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(target, e))?;
    tmp.persist(target)
        .map_err(|e| CliError::io(target, e.error))?;
    Ok(())
}
