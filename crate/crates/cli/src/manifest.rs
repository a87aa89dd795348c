//! Run manifests and CSV output.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct CausticFlag {
    pub safe_time: f64,
    pub requested: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Value,
    pub outputs: Vec<String>,
    pub wall_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caustic: Option<CausticFlag>,
}

pub struct Run {
    command: String,
    inputs: Value,
    outputs: Vec<PathBuf>,
    started: Instant,
    caustic: Option<CausticFlag>,
}

impl Run {
    pub fn start(command: impl Into<String>, inputs: Value) -> Self {
        Self {
            command: command.into(),
            inputs,
            outputs: Vec::new(),
            started: Instant::now(),
            caustic: None,
        }
    }

    pub fn write_csv<R: Serialize>(&mut self, path: &Path, header: &[&str], rows: &[R]) -> Result<(), CliError> {
        ensure_parent(path)?;
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(path)
            .map_err(|e| CliError::io(path, e))?;
        w.write_record(header).map_err(|e| CliError::io(path, e))?;
        for r in rows {
            w.serialize(r).map_err(|e| CliError::io(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<(), CliError> {
        ensure_parent(path)?;
        let text = serde_json::to_string_pretty(value).expect("serializable");
        std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    pub fn flag_caustic(&mut self, safe_time: f64, requested: f64) {
        self.caustic = Some(CausticFlag { safe_time, requested });
    }

    pub fn finish(self, manifest_path: &Path) -> Result<(), CliError> {
        let manifest = RunManifest {
            command: self.command,
            inputs: self.inputs,
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
            wall_time: self.started.elapsed().as_secs_f64(),
            caustic: self.caustic,
        };
        ensure_parent(manifest_path)?;
        let text = serde_json::to_string_pretty(&manifest).expect("serializable");
        std::fs::write(manifest_path, text + "\n").map_err(|e| CliError::io(manifest_path, e))
    }
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
        }
        _ => Ok(()),
    }
}

/// `<file>.manifest.json` beside a single output file.
pub fn manifest_beside(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}
