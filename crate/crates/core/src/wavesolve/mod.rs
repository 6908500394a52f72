//! Solitary waves from the discretized height-function system.

mod continuation;
mod grid;
mod newton;
mod system;

pub use continuation::{
    continue_branch, BranchEndpoint, BranchPoint, ContinuationBranch, ContinuationOptions,
};
pub use grid::{HeightField, StripGrid};
pub use newton::{initial_guess, long_wave_amplitude, newton_solve, NewtonOptions, Seed};
pub use system::{jacobian, residual, Discretization};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::banded::SingularMatrix;
use crate::shear::{build_asymptotic_state, AsymptoticState, ShearError, ShearProfile};
use crate::sturm::{solve_sturm, tension_decay_mode, SturmError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Shear(#[from] ShearError),
    #[error(transparent)]
    Sturm(#[from] SturmError),
    #[error("cannot seed a solitary wave: mu1 = {mu1:.6e} is not positive (F <= 1 without surface tension?)")]
    SubcriticalSeed { mu1: f64 },
    #[error("degenerate height field: min h_p = {min_hp:.6e}")]
    Degenerate { min_hp: f64 },
    #[error(transparent)]
    Singular(#[from] SingularMatrix),
    #[error("line search stalled after {iters} iterations, residual {residual:.3e}")]
    LineSearchStall { iters: usize, residual: f64 },
    #[error("no convergence in {iters} iterations, residual {residual:.3e}")]
    IterationCap { iters: usize, residual: f64 },
    #[error("continuation failed: {0}")]
    Continuation(String),
}

impl WaveError {
    /// Last residual norm for solver failures.
    pub fn residual(&self) -> Option<f64> {
        match self {
            Self::LineSearchStall { residual, .. } | Self::IterationCap { residual, .. } => {
                Some(*residual)
            }
            _ => None,
        }
    }
}

/// Converged height field with the data it was computed from.
#[derive(Clone, Debug)]
pub struct WaveSolution {
    pub grid: StripGrid,
    pub field: HeightField,
    pub state: AsymptoticState,
    pub froude: f64,
    pub sigma: f64,
    pub residual_norm: f64,
    pub newton_iters: usize,
    /// `max_q η`.
    pub amplitude: f64,
    /// `η` at the point of largest `|η|` (negative for depression waves).
    pub extremum: f64,
    pub tol: f64,
}

impl WaveSolution {
    pub fn new(
        grid: StripGrid,
        field: HeightField,
        state: AsymptoticState,
        sigma: f64,
        residual_norm: f64,
        newton_iters: usize,
        tol: f64,
    ) -> Self {
        let eta = field.eta();
        let amplitude = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let extremum = eta
            .iter()
            .copied()
            .fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
        Self {
            grid,
            froude: state.froude,
            field,
            state,
            sigma,
            residual_norm,
            newton_iters,
            amplitude,
            extremum,
            tol,
        }
    }

    /// The solution on the full line (identity for full-line solves).
    pub fn to_full_line(&self) -> Self {
        if !self.grid.symmetric_half {
            return self.clone();
        }
        Self {
            grid: self.grid.full_line(),
            field: self.field.mirrored(),
            ..self.clone()
        }
    }

    pub fn eta(&self) -> Vec<f64> {
        self.field.eta()
    }

    pub fn q(&self) -> Vec<f64> {
        (0..self.grid.ncols()).map(|i| self.grid.q(i)).collect()
    }

    pub fn is_elevation(&self) -> bool {
        self.extremum > 0.0
    }
}

/// Parameters for [`solve_wave`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub np: usize,
    pub nq: usize,
    /// Half-length `L`; `None` means `length_factor / √μ₁`.
    pub half_length: Option<f64>,
    pub length_factor: f64,
    pub sigma: f64,
    /// Seed amplitude `r`; `None` means the long-wave estimate.
    pub seed_amplitude: Option<f64>,
    pub symmetric_half: bool,
    pub newton: NewtonOptions,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            np: 65,
            nq: 801,
            half_length: None,
            length_factor: 40.0,
            sigma: 0.0,
            seed_amplitude: None,
            symmetric_half: true,
            newton: NewtonOptions::default(),
        }
    }
}

/// Everything needed to start Newton for a profile.
#[derive(Clone, Debug)]
pub struct Setup {
    pub state: AsymptoticState,
    pub seed: Seed,
    pub grid: StripGrid,
    pub amplitude: f64,
}

pub fn prepare(profile: &ShearProfile, config: &SolveConfig) -> Result<Setup, WaveError> {
    let state = build_asymptotic_state(profile, config.np)?;
    let seed = if config.sigma == 0.0 {
        Seed::from(&solve_sturm(&state, 2)?)
    } else {
        Seed::from(&tension_decay_mode(&state, config.sigma)?)
    };
    if !(seed.mu > 0.0) {
        return Err(WaveError::SubcriticalSeed { mu1: seed.mu });
    }
    let half_length = config
        .half_length
        .unwrap_or(config.length_factor / seed.mu.sqrt());
    let grid = StripGrid::new(half_length, config.nq, config.np, config.symmetric_half)?;
    let amplitude = config
        .seed_amplitude
        .unwrap_or_else(|| long_wave_amplitude(&state, &seed, state.froude));
    Ok(Setup {
        state,
        seed,
        grid,
        amplitude,
    })
}

/// Builds the state, seeds from the decay mode and runs Newton.
pub fn solve_wave(profile: &ShearProfile, config: &SolveConfig) -> Result<WaveSolution, WaveError> {
    let setup = prepare(profile, config)?;
    let guess = initial_guess(&setup.state, &setup.seed, setup.amplitude, &setup.grid)?;
    newton_solve(guess, &setup.state, config.sigma, &setup.grid, &config.newton)
}
