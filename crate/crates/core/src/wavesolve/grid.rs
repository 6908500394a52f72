use serde::{Deserialize, Serialize};

use super::WaveError;
use crate::shear::AsymptoticState;

/// Truncated strip `[-L, L] × [-m, 0]` in `(q, p)`.
///
/// `nq` counts nodes on the full line and must be odd so that `q = 0` is a
/// node. With `symmetric_half` only `q ∈ [0, L]` is stored and the field is
/// extended evenly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripGrid {
    pub half_length: f64,
    pub nq: usize,
    pub np: usize,
    pub symmetric_half: bool,
}

impl StripGrid {
    pub fn new(half_length: f64, nq: usize, np: usize, symmetric_half: bool) -> Result<Self, WaveError> {
        let g = Self {
            half_length,
            nq,
            np,
            symmetric_half,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), WaveError> {
        if !(self.half_length > 0.0) || !self.half_length.is_finite() {
            return Err(WaveError::Grid(format!(
                "half-length must be positive, got {}",
                self.half_length
            )));
        }
        if self.nq < 9 || self.nq % 2 == 0 {
            return Err(WaveError::Grid(format!("nq must be odd and at least 9, got {}", self.nq)));
        }
        if self.np < 16 {
            return Err(WaveError::Grid(format!("np must be at least 16, got {}", self.np)));
        }
        Ok(())
    }

    /// Number of stored q-columns.
    pub fn ncols(&self) -> usize {
        if self.symmetric_half {
            self.nq.div_ceil(2)
        } else {
            self.nq
        }
    }

    pub fn dq(&self) -> f64 {
        2.0 * self.half_length / (self.nq - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        if self.symmetric_half {
            i as f64 * self.dq()
        } else {
            -self.half_length + i as f64 * self.dq()
        }
    }

    /// Column holding `q = 0`.
    pub fn center(&self) -> usize {
        if self.symmetric_half {
            0
        } else {
            (self.nq - 1) / 2
        }
    }

    pub fn unknowns(&self) -> usize {
        self.ncols() * self.np
    }

    pub fn full_line(&self) -> Self {
        Self {
            symmetric_half: false,
            ..*self
        }
    }

    /// Same domain with twice the resolution in both directions.
    pub fn refined(&self) -> Self {
        Self {
            nq: 2 * self.nq - 1,
            np: 2 * self.np - 1,
            ..*self
        }
    }
}

/// Height function `h = H(p) + w` on a [`StripGrid`], stored as the
/// deviation `w` column by column (`index = i * np + j`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightField {
    pub ncols: usize,
    pub np: usize,
    /// `H(p_j)`.
    pub base: Vec<f64>,
    pub w: Vec<f64>,
}

impl HeightField {
    pub fn trivial(grid: &StripGrid, state: &AsymptoticState) -> Self {
        Self {
            ncols: grid.ncols(),
            np: grid.np,
            base: state.height.clone(),
            w: vec![0.0; grid.unknowns()],
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.np + j
    }

    pub fn w(&self, i: usize, j: usize) -> f64 {
        self.w[self.index(i, j)]
    }

    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.base[j] + self.w[self.index(i, j)]
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.w[i * self.np..(i + 1) * self.np]
    }

    /// Surface elevation `η_i = h(q_i, 0) - H(0)`.
    pub fn eta(&self) -> Vec<f64> {
        (0..self.ncols).map(|i| self.w(i, self.np - 1)).collect()
    }

    /// `min (h_{j+1} - h_j) / Δp` over all p-faces.
    pub fn min_hp(&self, dp: f64) -> (f64, usize, usize) {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..self.ncols {
            for j in 0..self.np - 1 {
                let v = (self.h(i, j + 1) - self.h(i, j)) / dp;
                if v < best.0 {
                    best = (v, i, j);
                }
            }
        }
        best
    }

    pub fn max_hp(&self, dp: f64) -> f64 {
        let mut best = 0.0_f64;
        for i in 0..self.ncols {
            for j in 0..self.np - 1 {
                best = best.max((self.h(i, j + 1) - self.h(i, j)) / dp);
            }
        }
        best
    }

    /// Even reflection of a half-line field onto the full line.
    pub fn mirrored(&self) -> Self {
        let n = self.ncols;
        let mut w = Vec::with_capacity((2 * n - 1) * self.np);
        for i in (1..n).rev() {
            w.extend_from_slice(self.column(i));
        }
        for i in 0..n {
            w.extend_from_slice(self.column(i));
        }
        Self {
            ncols: 2 * n - 1,
            np: self.np,
            base: self.base.clone(),
            w,
        }
    }
}
