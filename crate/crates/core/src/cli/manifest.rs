use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::waveio::{file_checksum, write_atomic, WaveIoError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Provenance record written next to every command's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: serde_json::Value,
    pub tool_version: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_time_s: f64,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn new(command_line: Vec<String>) -> Self {
        Self {
            command_line,
            config: serde_json::Value::Null,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            wall_time_s: 0.0,
            exit_code: 0,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), WaveIoError> {
        self.inputs.push(digest(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<(), WaveIoError> {
        self.outputs.push(digest(path)?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), WaveIoError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomic(path, text.as_bytes())
    }
}

fn digest(path: &Path) -> Result<FileDigest, WaveIoError> {
    Ok(FileDigest {
        path: path.to_path_buf(),
        sha256: file_checksum(path)?,
    })
}
