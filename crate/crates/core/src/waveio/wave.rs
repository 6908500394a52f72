use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::canonical::{canonical_json, canonical_value, sha256_hex};
use super::external::{convert_external, ConversionReport, ExternalWave};
use super::{read_text, write_atomic, WaveIoError};
use crate::shear::{build_asymptotic_state, ShearProfile};
use crate::wavesolve::{Discretization, HeightField, StripGrid, WaveSolution};

pub const FORMAT_VERSION: u64 = 1;

/// `(m, F, Λ, λ)` of the upstream flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateScalars {
    pub m: f64,
    #[serde(rename = "F")]
    pub froude: f64,
    #[serde(rename = "Lambda")]
    pub lambda_ratio: f64,
    #[serde(rename = "lambda")]
    pub bernoulli: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub tol: f64,
    pub iterations: usize,
    pub residual_norm: f64,
}

/// Everything a wave file stores; `h` and `w` are indexed `i * np + j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavePayload {
    pub profile: ShearProfile,
    pub grid: StripGrid,
    pub h: Vec<f64>,
    /// `h - H`, kept so far-field values below the rounding of `h` survive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    pub state: StateScalars,
    pub sigma: f64,
    pub solver: SolverMeta,
}

impl WavePayload {
    pub fn from_solution(sol: &WaveSolution) -> Self {
        let f = &sol.field;
        let h = (0..f.ncols)
            .flat_map(|i| (0..f.np).map(move |j| (i, j)))
            .map(|(i, j)| f.h(i, j))
            .collect();
        let st = &sol.state;
        Self {
            profile: st.profile.clone(),
            grid: sol.grid,
            h,
            w: Some(f.w.clone()),
            state: StateScalars {
                m: st.flux,
                froude: st.froude,
                lambda_ratio: st.lambda_ratio.value,
                bernoulli: st.bernoulli,
            },
            sigma: sol.sigma,
            solver: SolverMeta {
                tol: sol.tol,
                iterations: sol.newton_iters,
                residual_norm: sol.residual_norm,
            },
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    checksum: &'a str,
    format_version: u64,
    payload: &'a WavePayload,
}

/// Checksum a solution would be written with.
pub fn wave_checksum(sol: &WaveSolution) -> String {
    sha256_hex(canonical_json(&WavePayload::from_solution(sol)).as_bytes())
}

pub fn write_wave(sol: &WaveSolution, path: &Path) -> Result<String, WaveIoError> {
    let payload = WavePayload::from_solution(sol);
    let checksum = sha256_hex(canonical_json(&payload).as_bytes());
    let mut text = canonical_json(&Envelope {
        checksum: &checksum,
        format_version: FORMAT_VERSION,
        payload: &payload,
    });
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(checksum)
}

#[derive(Clone, Debug)]
pub struct LoadedWave {
    pub solution: WaveSolution,
    /// Checksum of the canonical payload (computed for external files).
    pub checksum: String,
    pub conversion: Option<ConversionReport>,
}

/// Reads a native wave file, or converts an external `(u, v, η)` file.
pub fn read_wave(path: &Path) -> Result<LoadedWave, WaveIoError> {
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| WaveIoError::parse(path, e))?;
    if value.get("format_version").is_none() {
        let ext: ExternalWave =
            serde_json::from_value(value).map_err(|e| WaveIoError::parse(path, e))?;
        let (solution, report) = convert_external(&ext).map_err(|e| match e {
            WaveIoError::Invalid { reason, .. } => WaveIoError::invalid(path, reason),
            other => other,
        })?;
        let checksum = wave_checksum(&solution);
        return Ok(LoadedWave {
            solution,
            checksum,
            conversion: Some(report),
        });
    }
    let found = value["format_version"]
        .as_u64()
        .ok_or_else(|| WaveIoError::invalid(path, "format_version is not an integer"))?;
    if found != FORMAT_VERSION {
        return Err(WaveIoError::Version {
            path: path.to_path_buf(),
            found,
            expected: FORMAT_VERSION,
        });
    }
    let stored = value["checksum"]
        .as_str()
        .ok_or_else(|| WaveIoError::invalid(path, "missing checksum"))?
        .to_string();
    let payload_value = value
        .get("payload")
        .ok_or_else(|| WaveIoError::invalid(path, "missing payload"))?;
    let computed = sha256_hex(canonical_value(payload_value).as_bytes());
    if computed != stored {
        return Err(WaveIoError::Checksum {
            path: path.to_path_buf(),
            stored,
            computed,
        });
    }
    let payload: WavePayload =
        serde_json::from_value(payload_value.clone()).map_err(|e| WaveIoError::parse(path, e))?;
    let solution = solution_from_payload(payload, path)?;
    let (min_hp, _, _) = solution.field.min_hp(solution.state.dp);
    if !(min_hp > 0.0) {
        return Err(WaveIoError::Quarantined {
            path: path.to_path_buf(),
            min_hp,
            solution: Box::new(solution),
        });
    }
    Ok(LoadedWave {
        solution,
        checksum: computed,
        conversion: None,
    })
}

fn solution_from_payload(p: WavePayload, path: &Path) -> Result<WaveSolution, WaveIoError> {
    p.grid
        .validate()
        .map_err(|e| WaveIoError::invalid(path, e.to_string()))?;
    let n = p.grid.unknowns();
    if p.h.len() != n {
        return Err(WaveIoError::invalid(
            path,
            format!("h has {} values, grid needs {n}", p.h.len()),
        ));
    }
    let state = build_asymptotic_state(&p.profile, p.grid.np)?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300);
    let s = &p.state;
    if !(close(s.m, state.flux)
        && close(s.froude, state.froude)
        && close(s.lambda_ratio, state.lambda_ratio.value)
        && close(s.bernoulli, state.bernoulli))
    {
        return Err(WaveIoError::invalid(
            path,
            "stored state scalars disagree with the profile",
        ));
    }
    let np = p.grid.np;
    let d = p.profile.d;
    let w = match p.w {
        Some(w) => {
            if w.len() != n {
                return Err(WaveIoError::invalid(path, "w has the wrong length"));
            }
            for (k, (hv, wv)) in p.h.iter().zip(&w).enumerate() {
                if (hv - (state.height[k % np] + wv)).abs() > 1e-12 * d {
                    return Err(WaveIoError::invalid(
                        path,
                        format!("h and w disagree at index {k}"),
                    ));
                }
            }
            w
        }
        None => p
            .h
            .iter()
            .enumerate()
            .map(|(k, hv)| hv - state.height[k % np])
            .collect(),
    };
    let field = HeightField {
        ncols: p.grid.ncols(),
        np,
        base: state.height.clone(),
        w,
    };
    Ok(WaveSolution::new(
        p.grid,
        field,
        state,
        p.sigma,
        p.solver.residual_norm,
        p.solver.iterations,
        p.solver.tol,
    ))
}

/// Max-norm residual of the discrete system at the stored field.
pub fn recompute_residual(sol: &WaveSolution) -> Result<f64, WaveIoError> {
    let disc = Discretization::new(&sol.state, &sol.grid, sol.sigma)?;
    let r = disc.residual(&sol.field.w)?;
    Ok(r.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}
