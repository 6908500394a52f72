use std::path::Path;

use serde::{Deserialize, Serialize};

use super::wave::recompute_residual;
use super::WaveIoError;
use crate::diagnostics::recover_physical;
use crate::numerics::{bracket, cumulative, hermite, CubicSpline};
use crate::shear::{build_asymptotic_state, ShearProfile};
use crate::wavesolve::{HeightField, NewtonOptions, StripGrid, WaveSolution};

pub const EXTERNAL_FORMAT: &str = "uv-eta";

/// A wave given in physical variables on a uniform, symmetric `x` grid.
///
/// Column `i` samples `u` and `v` at `ny` equally spaced heights from the bed
/// `y = -d` to the surface `y = η_i`, stored at `i * ny + k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalWave {
    pub format: String,
    pub profile: ShearProfile,
    #[serde(default)]
    pub sigma: f64,
    /// Number of `p` nodes to rebuild `h` on.
    pub np: usize,
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    pub ny: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// How well the rebuilt height function reproduces the input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversionReport {
    /// `max_i |∫(c - u) dy - m| / m`.
    pub flux_mismatch: f64,
    /// `max |c - 1/h_p - u| / c` at the rebuilt nodes.
    pub u_residual: f64,
    /// `max |-h_q/h_p - v| / c` at the rebuilt nodes.
    pub v_residual: f64,
    /// Residual of the discrete height equations at the rebuilt field.
    pub equation_residual: f64,
}

fn invalid(reason: impl Into<String>) -> WaveIoError {
    WaveIoError::invalid(Path::new("<external>"), reason)
}

fn validate(e: &ExternalWave) -> Result<(), WaveIoError> {
    if e.format != EXTERNAL_FORMAT {
        return Err(invalid(format!(
            "unknown external format {:?} (expected {EXTERNAL_FORMAT:?})",
            e.format
        )));
    }
    let nx = e.x.len();
    if nx < 9 || nx % 2 == 0 {
        return Err(invalid(format!("need an odd number (>= 9) of x samples, got {nx}")));
    }
    if e.ny < 5 {
        return Err(invalid(format!("need at least 5 samples per column, got {}", e.ny)));
    }
    if e.eta.len() != nx || e.u.len() != nx * e.ny || e.v.len() != nx * e.ny {
        return Err(invalid("eta, u, v lengths do not match x and ny"));
    }
    let dx = (e.x[nx - 1] - e.x[0]) / (nx - 1) as f64;
    let uniform = e
        .x
        .iter()
        .enumerate()
        .all(|(i, x)| (x - (e.x[0] + i as f64 * dx)).abs() <= 1e-9 * dx);
    if !(dx > 0.0) || !uniform {
        return Err(invalid("x must be uniform and increasing"));
    }
    if (e.x[0] + e.x[nx - 1]).abs() > 1e-9 * dx {
        return Err(invalid("x must be symmetric about 0"));
    }
    Ok(())
}

/// Rebuilds `h(q, p)` by integrating `c - u` up each column and inverting the
/// monotone map `y ↦ p`.
pub fn convert_external(e: &ExternalWave) -> Result<(WaveSolution, ConversionReport), WaveIoError> {
    validate(e)?;
    let nx = e.x.len();
    let ny = e.ny;
    let c = e.profile.c;
    let d = e.profile.d;
    let state = build_asymptotic_state(&e.profile, e.np)?;
    let np = state.np;
    let m = state.flux;
    let grid = StripGrid::new(e.x[nx - 1], nx, np, false)?;

    let mut w = vec![0.0; nx * np];
    let mut flux_mismatch = 0.0_f64;
    for i in 0..nx {
        let depth = d + e.eta[i];
        if !(depth > 0.0) {
            return Err(invalid(format!("column {i} has non-positive depth")));
        }
        let dy = depth / (ny - 1) as f64;
        let s: Vec<f64> = e.u[i * ny..(i + 1) * ny].iter().map(|u| c - u).collect();
        if let Some(k) = s.iter().position(|v| !(*v > 0.0)) {
            return Err(invalid(format!("u >= c at column {i}, sample {k}")));
        }
        let cum = cumulative(&s, dy);
        let total = cum[ny - 1];
        flux_mismatch = flux_mismatch.max((total - m).abs() / m);
        let ps: Vec<f64> = cum.iter().map(|v| v - total).collect();
        let ys: Vec<f64> = (0..ny).map(|k| -d + k as f64 * dy).collect();
        for j in 1..np - 1 {
            let target = state.p(j);
            let y = if target <= ps[0] {
                -d
            } else {
                let k = bracket(&ps, target);
                hermite(ps[k], ps[k + 1], ys[k], ys[k + 1], 1.0 / s[k], 1.0 / s[k + 1], target)
            };
            w[i * np + j] = y + d - state.height[j];
        }
        w[i * np + np - 1] = e.eta[i];
    }
    let field = HeightField {
        ncols: nx,
        np,
        base: state.height.clone(),
        w,
    };
    let tol = NewtonOptions::default().tolerance(&state);
    let mut sol = WaveSolution::new(grid, field, state, e.sigma, 0.0, 0, tol);
    let equation_residual = recompute_residual(&sol)?;
    sol.residual_norm = equation_residual;

    let phys = recover_physical(&sol).map_err(|err| invalid(err.to_string()))?;
    let mut u_residual = 0.0_f64;
    let mut v_residual = 0.0_f64;
    for i in 0..nx {
        let depth = d + e.eta[i];
        let dy = depth / (ny - 1) as f64;
        let ys: Vec<f64> = (0..ny).map(|k| -d + k as f64 * dy).collect();
        let us = CubicSpline::new(ys.clone(), e.u[i * ny..(i + 1) * ny].to_vec());
        let vs = CubicSpline::new(ys, e.v[i * ny..(i + 1) * ny].to_vec());
        for j in 0..np {
            let k = i * np + j;
            let y = phys.y[k];
            u_residual = u_residual.max((phys.u[k] - us.eval(y)).abs() / c);
            v_residual = v_residual.max((phys.v[k] - vs.eval(y)).abs() / c);
        }
    }
    Ok((
        sol,
        ConversionReport {
            flux_mismatch,
            u_residual,
            v_residual,
            equation_residual,
        },
    ))
}

/// Samples a solution in physical variables, `ny` points per column.
pub fn external_from_solution(sol: &WaveSolution, ny: usize) -> Result<ExternalWave, WaveIoError> {
    let phys = recover_physical(sol).map_err(|err| invalid(err.to_string()))?;
    let full = sol.to_full_line();
    let np = full.grid.np;
    let d = sol.state.profile.d;
    let nx = full.grid.ncols();
    let mut u = Vec::with_capacity(nx * ny);
    let mut v = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let ys = phys.y[i * np..(i + 1) * np].to_vec();
        let us = CubicSpline::new(ys.clone(), phys.u[i * np..(i + 1) * np].to_vec());
        let vs = CubicSpline::new(ys, phys.v[i * np..(i + 1) * np].to_vec());
        let dy = (d + phys.eta[i]) / (ny - 1) as f64;
        for k in 0..ny {
            let y = -d + k as f64 * dy;
            u.push(us.eval(y));
            v.push(vs.eval(y));
        }
    }
    Ok(ExternalWave {
        format: EXTERNAL_FORMAT.into(),
        profile: sol.state.profile.clone(),
        sigma: sol.sigma,
        np,
        x: phys.q.clone(),
        eta: phys.eta.clone(),
        ny,
        u,
        v,
    })
}
