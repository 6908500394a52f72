//! Wave files, branch logs and the canonical JSON they are hashed in.

mod branch;
mod canonical;
mod external;
mod wave;

pub use branch::{read_branch_log, BranchEntry, BranchLog, BranchLogContents};
pub use canonical::{canonical_json, sha256_hex};
pub use external::{convert_external, external_from_solution, ConversionReport, ExternalWave};
pub use wave::{
    read_wave, recompute_residual, wave_checksum, write_wave, LoadedWave, SolverMeta,
    StateScalars, WavePayload, FORMAT_VERSION,
};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::shear::{FamilySpec, ShearError, ShearProfile};
use crate::wavesolve::{WaveError, WaveSolution};

#[derive(Debug, Error)]
pub enum WaveIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: malformed JSON: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: unsupported format version {found} (expected {expected})")]
    Version {
        path: PathBuf,
        found: u64,
        expected: u64,
    },
    #[error("{path}: checksum mismatch (stored {stored}, computed {computed})")]
    Checksum {
        path: PathBuf,
        stored: String,
        computed: String,
    },
    #[error("{path}: invalid content: {reason}")]
    Invalid { path: PathBuf, reason: String },
    #[error("{path}: field quarantined, min h_p = {min_hp:.6e} is not positive")]
    Quarantined {
        path: PathBuf,
        min_hp: f64,
        /// The field as stored, for audit-only inspection.
        solution: Box<WaveSolution>,
    },
    #[error(transparent)]
    Shear(#[from] ShearError),
    #[error(transparent)]
    Wave(#[from] WaveError),
}

impl WaveIoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn parse(path: &Path, source: serde_json::Error) -> Self {
        Self::Parse {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn invalid(path: &Path, reason: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), WaveIoError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| WaveIoError::io(&dir, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(WaveIoError::io(path, e));
    }
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String, WaveIoError> {
    fs::read_to_string(path).map_err(|e| WaveIoError::io(path, e))
}

pub fn read_profile(path: &Path) -> Result<ShearProfile, WaveIoError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| WaveIoError::parse(path, e))
}

pub fn write_profile(profile: &ShearProfile, path: &Path) -> Result<(), WaveIoError> {
    let text = serde_json::to_string_pretty(profile).expect("profile serializes");
    write_atomic(path, text.as_bytes())
}

pub fn read_family(path: &Path) -> Result<FamilySpec, WaveIoError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| WaveIoError::parse(path, e))
}

/// SHA-256 of a file's bytes.
pub fn file_checksum(path: &Path) -> Result<String, WaveIoError> {
    let bytes = fs::read(path).map_err(|e| WaveIoError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}
