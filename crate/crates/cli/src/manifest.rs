//! Run manifests and atomic output writing.
//!
//! Every command leaves a `<command>.manifest.json` next to its outputs
//! recording what ran, on which inputs, with which parameters. The config
//! snapshot is the command's parsed parameter set, so rereading it yields
//! exactly the values the run used.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::config::Failure;

#[derive(Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub inputs: Vec<String>,
    pub output_dir: String,
    pub outputs: Vec<String>,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
    pub started_at: String,
    pub finished_at: String,
}

/// One command execution: creates the output directory up front, writes
/// outputs atomically, and seals the manifest at the end.
pub struct Run {
    command: &'static str,
    out_dir: PathBuf,
    inputs: Vec<String>,
    outputs: Vec<String>,
    started_at: String,
}

impl Run {
    pub fn start(command: &'static str, inputs: &[PathBuf], out_dir: &Path) -> Result<Run, Failure> {
        fs::create_dir_all(out_dir)
            .map_err(|e| Failure::data(format!("{}: {e}", out_dir.display())))?;
        Ok(Run {
            command,
            out_dir: out_dir.to_path_buf(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: Vec::new(),
            started_at: now(),
        })
    }

    /// Write one output file under the run's directory via a temporary
    /// sibling and a rename, and record it for the manifest.
    pub fn write_output(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        write_atomic(&self.out_dir.join(name), bytes)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Write the manifest itself; call once, after all outputs.
    pub fn finish(self, config: serde_json::Value, note: Option<String>) -> Result<(), Failure> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: self.inputs,
            output_dir: self.out_dir.display().to_string(),
            outputs: self.outputs,
            config,
            note,
            started_at: self.started_at,
            finished_at: now(),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)
            .map_err(|e| Failure::data(format!("manifest serialization: {e}")))?;
        bytes.push(b'\n');
        write_atomic(&self.out_dir.join(format!("{}.manifest.json", manifest.command)), &bytes)
    }
}

/// Serialize a command's parameter struct into the manifest config slot.
pub fn snapshot<T: Serialize>(config: &T) -> Result<serde_json::Value, Failure> {
    serde_json::to_value(config)
        .map_err(|e| Failure::data(format!("config serialization: {e}")))
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let context = |e: std::io::Error| Failure::data(format!("{}: {e}", path.display()));
    let name = path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(context)?;
    fs::rename(&tmp, path).map_err(context)
}
