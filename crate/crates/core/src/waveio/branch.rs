use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_text, write_wave, WaveIoError};
use crate::shear::FamilySpec;
use crate::wavesolve::{BranchEndpoint, BranchPoint};

/// One line of a branch log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchEntry {
    Header {
        family: FamilySpec,
        sigma: f64,
        lambda_ratio: f64,
    },
    Point {
        index: usize,
        froude: f64,
        amplitude: f64,
        arclength: f64,
        sup_u_over_c: f64,
        speed_margin: f64,
        /// Checksum of the wave file holding `h`.
        checksum: String,
        /// Wave file path relative to the log's directory.
        file: String,
    },
    Endpoint {
        endpoint: BranchEndpoint,
    },
}

/// Append-only JSON-lines log; solutions go to side files named by checksum.
pub struct BranchLog {
    path: PathBuf,
    side_dir: PathBuf,
    file: File,
    points: usize,
}

impl BranchLog {
    /// Starts a new log, replacing any file at `path`.
    pub fn create(path: &Path) -> Result<Self, WaveIoError> {
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| WaveIoError::io(dir, e))?;
        }
        let file = File::create(path).map_err(|e| WaveIoError::io(path, e))?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "branch".into());
        let side_dir = path.with_file_name(format!("{stem}.waves"));
        Ok(Self {
            path: path.to_path_buf(),
            side_dir,
            file,
            points: 0,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn side_dir(&self) -> &Path {
        &self.side_dir
    }

    pub fn append(&mut self, entry: &BranchEntry) -> Result<(), WaveIoError> {
        let mut line = serde_json::to_string(entry).expect("entry serializes");
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| WaveIoError::io(&self.path, e))
    }

    /// Writes the point's solution to its side file, then logs it.
    pub fn append_point(&mut self, point: &BranchPoint) -> Result<BranchEntry, WaveIoError> {
        let tmp = self.side_dir.join(".pending.json");
        let checksum = write_wave(&point.solution, &tmp)?;
        let name = format!("{checksum}.json");
        let target = self.side_dir.join(&name);
        fs::rename(&tmp, &target).map_err(|e| WaveIoError::io(&target, e))?;
        let dir_name = self
            .side_dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let entry = BranchEntry::Point {
            index: self.points,
            froude: point.froude,
            amplitude: point.amplitude,
            arclength: point.arclength,
            sup_u_over_c: point.sup_u_over_c,
            speed_margin: point.speed_margin,
            checksum,
            file: format!("{dir_name}/{name}"),
        };
        self.append(&entry)?;
        self.points += 1;
        Ok(entry)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchLogContents {
    pub entries: Vec<BranchEntry>,
    /// A trailing partial line was dropped.
    pub truncated: bool,
}

/// Reads every complete entry; a damaged final line is skipped, damage
/// anywhere else is an error.
pub fn read_branch_log(path: &Path) -> Result<BranchLogContents, WaveIoError> {
    let text = read_text(path)?;
    let lines: Vec<&str> = text.split('\n').collect();
    let mut entries = Vec::new();
    let mut truncated = false;
    for (k, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let last = k + 1 == lines.len() || lines[k + 1..].iter().all(|l| l.trim().is_empty());
        match serde_json::from_str::<BranchEntry>(line) {
            Ok(e) => entries.push(e),
            Err(_) if last => truncated = true,
            Err(e) => {
                return Err(WaveIoError::invalid(
                    path,
                    format!("line {}: {e}", k + 1),
                ))
            }
        }
    }
    Ok(BranchLogContents { entries, truncated })
}
