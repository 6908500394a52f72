//! Discrete height-function system on a [`StripGrid`].
//!
//! Unknown: `w = h - H`. Rows:
//! - interior `(i, j)`, `0 < j < N`: `Δp` times the divergence
//!   `[A]_p + [B]_q` with `A = 1/(2H_p²) - (1+h_q²)/(2h_p²)` on p-faces and
//!   `B = h_q/h_p` on q-faces;
//! - top `j = N`: `(1+h_q²)/(2h_p²) - 1/(2H_p²) + g w - σ (h_q/√(1+h_q²))_q`
//!   with a one-sided second-order `h_p`;
//! - bottom `j = 0` and far-field columns: `g w`.
//!
//! Base-state slopes come from the same difference formulas applied to `H`,
//! so `w = 0` is an exact discrete solution.

use rayon::prelude::*;

use super::grid::{HeightField, StripGrid};
use super::WaveError;
use crate::banded::BandMatrix;
use crate::shear::AsymptoticState;

/// Frozen coefficients of the discrete system.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub grid: StripGrid,
    pub dp: f64,
    pub dq: f64,
    /// Gravity entering the top rows.
    pub gravity: f64,
    /// Surface-tension coefficient entering the top rows.
    pub sigma: f64,
    /// Scale for pinned rows.
    pub pin_scale: f64,
    /// `(H_{j+1} - H_j)/Δp`.
    hf: Vec<f64>,
    /// `(H_{j+1} - H_{j-1})/(2Δp)`; endpoints unused.
    dc: Vec<f64>,
    /// One-sided `H_p` at the surface.
    ht: f64,
}

type Patch = [[f64; 3]; 3];

impl Discretization {
    pub fn new(state: &AsymptoticState, grid: &StripGrid, sigma: f64) -> Result<Self, WaveError> {
        Self::with_gravity(state, grid, state.g(), sigma)
    }

    pub fn with_gravity(
        state: &AsymptoticState,
        grid: &StripGrid,
        gravity: f64,
        sigma: f64,
    ) -> Result<Self, WaveError> {
        grid.validate()?;
        if grid.np != state.np {
            return Err(WaveError::Grid(format!(
                "grid has np = {} but the asymptotic state has {}",
                grid.np, state.np
            )));
        }
        let np = grid.np;
        let dp = state.dp;
        let h = &state.height;
        let hf: Vec<f64> = h.windows(2).map(|w| (w[1] - w[0]) / dp).collect();
        let mut dc = vec![0.0; np];
        for j in 1..np - 1 {
            dc[j] = (h[j + 1] - h[j - 1]) / (2.0 * dp);
        }
        let n = np - 1;
        let ht = (3.0 * h[n] - 4.0 * h[n - 1] + h[n - 2]) / (2.0 * dp);
        Ok(Self {
            grid: *grid,
            dp,
            dq: grid.dq(),
            gravity,
            sigma,
            pin_scale: state.g(),
            hf,
            dc,
            ht,
        })
    }

    pub fn unknowns(&self) -> usize {
        self.grid.unknowns()
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.grid.np + 2, self.grid.np + 1)
    }

    fn ncols(&self) -> usize {
        self.grid.ncols()
    }

    fn pinned_column(&self, i: usize) -> bool {
        let last = self.ncols() - 1;
        i == last || (!self.grid.symmetric_half && i == 0)
    }

    /// Storage column of patch column `a` around column `i` (mirror at `q = 0`).
    #[inline]
    fn patch_col(&self, i: usize, a: usize) -> usize {
        let c = i as isize - 1 + a as isize;
        if c < 0 {
            1
        } else {
            c as usize
        }
    }

    fn gather(&self, w: &[f64], i: usize, j0: usize) -> Patch {
        let np = self.grid.np;
        let mut p = [[0.0; 3]; 3];
        for (a, col) in p.iter_mut().enumerate() {
            let c = self.patch_col(i, a);
            for (b, v) in col.iter_mut().enumerate() {
                *v = w[c * np + j0 + b];
            }
        }
        p
    }

    /// Residual of an interior row with its derivatives w.r.t. the patch
    /// (patch rows `j-1, j, j+1`).
    fn interior(&self, p: &Patch, j: usize, want_d: bool) -> (f64, Patch) {
        let dp = self.dp;
        let dq = self.dq;
        let kappa = dp / dq;
        let mut d = [[0.0; 3]; 3];

        // p-face above
        let hf = self.hf[j];
        let dt = (p[1][2] - p[1][1]) / dp;
        let s = (p[2][1] - p[0][1] + p[2][2] - p[0][2]) / (4.0 * dq);
        let t = hf + dt;
        let a_up = dt * (2.0 * hf + dt) / (2.0 * hf * hf * t * t) - s * s / (2.0 * t * t);
        if want_d {
            let a_t = (1.0 + s * s) / (t * t * t);
            let a_s = -s / (t * t);
            d[1][2] += a_t / dp;
            d[1][1] -= a_t / dp;
            let c = a_s / (4.0 * dq);
            d[2][1] += c;
            d[2][2] += c;
            d[0][1] -= c;
            d[0][2] -= c;
        }

        // p-face below
        let hf = self.hf[j - 1];
        let dt = (p[1][1] - p[1][0]) / dp;
        let s = (p[2][0] - p[0][0] + p[2][1] - p[0][1]) / (4.0 * dq);
        let t = hf + dt;
        let a_dn = dt * (2.0 * hf + dt) / (2.0 * hf * hf * t * t) - s * s / (2.0 * t * t);
        if want_d {
            let a_t = (1.0 + s * s) / (t * t * t);
            let a_s = -s / (t * t);
            d[1][1] -= a_t / dp;
            d[1][0] += a_t / dp;
            let c = a_s / (4.0 * dq);
            d[2][0] -= c;
            d[2][1] -= c;
            d[0][0] += c;
            d[0][1] += c;
        }

        // q-faces
        let dc = self.dc[j];
        let s = (p[2][1] - p[1][1]) / dq;
        let t = dc + (p[1][2] - p[1][0] + p[2][2] - p[2][0]) / (4.0 * dp);
        let b_r = s / t;
        if want_d {
            let b_s = kappa / (t * dq);
            let b_t = -kappa * s / (t * t * 4.0 * dp);
            d[2][1] += b_s;
            d[1][1] -= b_s;
            d[1][2] += b_t;
            d[1][0] -= b_t;
            d[2][2] += b_t;
            d[2][0] -= b_t;
        }
        let s = (p[1][1] - p[0][1]) / dq;
        let t = dc + (p[0][2] - p[0][0] + p[1][2] - p[1][0]) / (4.0 * dp);
        let b_l = s / t;
        if want_d {
            let b_s = kappa / (t * dq);
            let b_t = -kappa * s / (t * t * 4.0 * dp);
            d[1][1] -= b_s;
            d[0][1] += b_s;
            d[0][2] -= b_t;
            d[0][0] += b_t;
            d[1][2] -= b_t;
            d[1][0] += b_t;
        }

        (a_up - a_dn + kappa * (b_r - b_l), d)
    }

    /// Residual of a top row with derivatives (patch rows `N-2, N-1, N`).
    fn top(&self, p: &Patch, want_d: bool) -> (f64, Patch) {
        let dp = self.dp;
        let dq = self.dq;
        let ht = self.ht;
        let mut d = [[0.0; 3]; 3];
        let dt = (3.0 * p[1][2] - 4.0 * p[1][1] + p[1][0]) / (2.0 * dp);
        let s = (p[2][2] - p[0][2]) / (2.0 * dq);
        let t = ht + dt;
        let mut r = -dt * (2.0 * ht + dt) / (2.0 * ht * ht * t * t)
            + s * s / (2.0 * t * t)
            + self.gravity * p[1][2];
        if want_d {
            let r_t = -(1.0 + s * s) / (t * t * t);
            let r_s = s / (t * t);
            d[1][2] += r_t * 3.0 / (2.0 * dp) + self.gravity;
            d[1][1] -= r_t * 4.0 / (2.0 * dp);
            d[1][0] += r_t / (2.0 * dp);
            d[2][2] += r_s / (2.0 * dq);
            d[0][2] -= r_s / (2.0 * dq);
        }
        if self.sigma != 0.0 {
            let sp = (p[2][2] - p[1][2]) / dq;
            let sm = (p[1][2] - p[0][2]) / dq;
            let tau = |x: f64| x / (1.0 + x * x).sqrt();
            let dtau = |x: f64| (1.0 + x * x).powf(-1.5);
            let k = self.sigma / dq;
            r -= k * (tau(sp) - tau(sm));
            if want_d {
                let cp = k * dtau(sp) / dq;
                let cm = k * dtau(sm) / dq;
                d[2][2] -= cp;
                d[1][2] += cp;
                d[1][2] += cm;
                d[0][2] -= cm;
            }
        }
        (r, d)
    }

    /// Row residuals of column `i` and, optionally, their patch derivatives.
    fn column_rows(&self, w: &[f64], i: usize, out: &mut [f64], mut jac: Option<&mut Vec<(usize, usize, f64)>>) {
        let np = self.grid.np;
        let n = np - 1;
        if self.pinned_column(i) {
            for j in 0..np {
                out[j] = self.pin_scale * w[i * np + j];
                if let Some(t) = jac.as_deref_mut() {
                    t.push((i * np + j, i * np + j, self.pin_scale));
                }
            }
            return;
        }
        out[0] = self.pin_scale * w[i * np];
        if let Some(t) = jac.as_deref_mut() {
            t.push((i * np, i * np, self.pin_scale));
        }
        for j in 1..np {
            let j0 = if j == n { n - 2 } else { j - 1 };
            let patch = self.gather(w, i, j0);
            let (r, d) = if j == n {
                self.top(&patch, jac.is_some())
            } else {
                self.interior(&patch, j, jac.is_some())
            };
            out[j] = r;
            if let Some(t) = jac.as_deref_mut() {
                let row = i * np + j;
                for (a, col) in d.iter().enumerate() {
                    let c = self.patch_col(i, a);
                    for (b, v) in col.iter().enumerate() {
                        if *v != 0.0 {
                            t.push((row, c * np + j0 + b, *v));
                        }
                    }
                }
            }
        }
    }

    /// Smallest discrete `h_p` over p-faces, one-sided surface values and q-face averages.
    pub fn min_slope(&self, w: &[f64]) -> f64 {
        let np = self.grid.np;
        let n = np - 1;
        let dp = self.dp;
        (0..self.ncols())
            .into_par_iter()
            .map(|i| {
                let col = &w[i * np..(i + 1) * np];
                let mut m = f64::INFINITY;
                for j in 0..n {
                    m = m.min(self.hf[j] + (col[j + 1] - col[j]) / dp);
                }
                m = m.min(self.ht + (3.0 * col[n] - 4.0 * col[n - 1] + col[n - 2]) / (2.0 * dp));
                for j in 1..n {
                    m = m.min(self.dc[j] + (col[j + 1] - col[j - 1]) / (2.0 * dp));
                }
                m
            })
            .reduce(|| f64::INFINITY, f64::min)
    }

    fn check(&self, w: &[f64]) -> Result<(), WaveError> {
        if w.len() != self.unknowns() {
            return Err(WaveError::Grid(format!(
                "field has {} values, grid expects {}",
                w.len(),
                self.unknowns()
            )));
        }
        let m = self.min_slope(w);
        if !(m > 0.0) {
            return Err(WaveError::Degenerate { min_hp: m });
        }
        Ok(())
    }

    pub fn residual(&self, w: &[f64]) -> Result<Vec<f64>, WaveError> {
        self.check(w)?;
        let np = self.grid.np;
        let mut out = vec![0.0; w.len()];
        out.par_chunks_mut(np)
            .enumerate()
            .for_each(|(i, chunk)| self.column_rows(w, i, chunk, None));
        Ok(out)
    }

    /// Residual and analytic Jacobian in band storage.
    pub fn linearize(&self, w: &[f64]) -> Result<(Vec<f64>, BandMatrix), WaveError> {
        self.check(w)?;
        let np = self.grid.np;
        let n = w.len();
        let mut out = vec![0.0; n];
        let triplets: Vec<Vec<(usize, usize, f64)>> = out
            .par_chunks_mut(np)
            .enumerate()
            .map(|(i, chunk)| {
                let mut t = Vec::with_capacity(9 * np);
                self.column_rows(w, i, chunk, Some(&mut t));
                t
            })
            .collect();
        let (kl, ku) = self.bandwidths();
        let mut m = BandMatrix::zeros(n, kl, ku);
        for t in triplets {
            for (r, c, v) in t {
                m.add(r, c, v);
            }
        }
        Ok((out, m))
    }

    /// Derivative of the residual with respect to the top-row gravity.
    pub fn gravity_derivative(&self, w: &[f64]) -> Vec<f64> {
        let np = self.grid.np;
        let mut out = vec![0.0; w.len()];
        for i in 0..self.ncols() {
            if !self.pinned_column(i) {
                out[i * np + np - 1] = w[i * np + np - 1];
            }
        }
        out
    }

    /// Derivative of the residual with respect to the surface-tension coefficient.
    pub fn sigma_derivative(&self, w: &[f64]) -> Vec<f64> {
        let np = self.grid.np;
        let dq = self.dq;
        let mut out = vec![0.0; w.len()];
        let tau = |x: f64| x / (1.0 + x * x).sqrt();
        for i in 0..self.ncols() {
            if self.pinned_column(i) {
                continue;
            }
            let p = self.gather(w, i, np - 3);
            let sp = (p[2][2] - p[1][2]) / dq;
            let sm = (p[1][2] - p[0][2]) / dq;
            out[i * np + np - 1] = -(tau(sp) - tau(sm)) / dq;
        }
        out
    }
}

/// Residual of `field` for the given state, surface tension and grid.
pub fn residual(
    field: &HeightField,
    state: &AsymptoticState,
    sigma: f64,
    grid: &StripGrid,
) -> Result<Vec<f64>, WaveError> {
    Discretization::new(state, grid, sigma)?.residual(&field.w)
}

/// Analytic Jacobian of [`residual`] with respect to `w`.
pub fn jacobian(
    field: &HeightField,
    state: &AsymptoticState,
    sigma: f64,
    grid: &StripGrid,
) -> Result<BandMatrix, WaveError> {
    Ok(Discretization::new(state, grid, sigma)?.linearize(&field.w)?.1)
}
