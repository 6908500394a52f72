use serde::{Deserialize, Serialize};

use super::grid::{HeightField, StripGrid};
use super::system::Discretization;
use super::{WaveError, WaveSolution};
use crate::banded::BandLu;
use crate::shear::AsymptoticState;
use crate::sturm::{DecayMode, SturmSpectrum};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonOptions {
    /// Max-norm tolerance; `None` means `1e-10 g d`.
    pub tol: Option<f64>,
    pub max_iters: usize,
    /// Accepted iterates keep `min h_p ≥ barrier_fraction · min H_p`.
    pub barrier_fraction: f64,
    pub backtrack: f64,
    pub min_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: None,
            max_iters: 30,
            barrier_fraction: 1e-3,
            backtrack: 0.5,
            min_step: 2f64.powi(-20),
        }
    }
}

impl NewtonOptions {
    pub fn tolerance(&self, state: &AsymptoticState) -> f64 {
        self.tol.unwrap_or(1e-10 * state.g() * state.profile.d)
    }
}

/// Nonlinear system in the form Newton needs.
pub(crate) trait System {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>, WaveError>;
    /// Solves `J dx = -r` at `x`.
    fn step(&self, x: &[f64], r: &[f64]) -> Result<Vec<f64>, WaveError>;
    fn min_slope(&self, x: &[f64]) -> f64;
}

pub(crate) struct Converged {
    pub x: Vec<f64>,
    pub iters: usize,
    pub residual_norm: f64,
}

fn max_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn two_norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Damped Newton with residual-norm backtracking and a slope barrier.
pub(crate) fn damped_newton<S: System>(
    sys: &S,
    mut x: Vec<f64>,
    tol: f64,
    barrier: f64,
    opts: &NewtonOptions,
) -> Result<Converged, WaveError> {
    let mut r = sys.residual(&x)?;
    let mut norm = max_norm(&r);
    for it in 0..=opts.max_iters {
        if norm < tol {
            return Ok(Converged {
                x,
                iters: it,
                residual_norm: norm,
            });
        }
        if it == opts.max_iters {
            break;
        }
        let dx = sys.step(&x, &r)?;
        let base = two_norm(&r);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + lambda * b).collect();
            if sys.min_slope(&trial) >= barrier {
                if let Ok(rt) = sys.residual(&trial) {
                    if two_norm(&rt) <= (1.0 - 1e-4 * lambda) * base {
                        x = trial;
                        r = rt;
                        norm = max_norm(&r);
                        break;
                    }
                }
            }
            lambda *= opts.backtrack;
            if lambda < opts.min_step {
                return Err(WaveError::LineSearchStall {
                    iters: it,
                    residual: norm,
                });
            }
        }
    }
    Err(WaveError::IterationCap {
        iters: opts.max_iters,
        residual: norm,
    })
}

/// Block elimination for `[J b; cᵀ d] [x; y] = [f; e]`.
pub(crate) fn bordered_solve(lu: &BandLu, b: &[f64], c: &[f64], d: f64, f: &[f64], e: f64) -> (Vec<f64>, f64) {
    let mut x1 = f.to_vec();
    lu.solve(&mut x1);
    let mut x2 = b.to_vec();
    lu.solve(&mut x2);
    let cx1: f64 = c.iter().zip(&x1).map(|(a, b)| a * b).sum();
    let cx2: f64 = c.iter().zip(&x2).map(|(a, b)| a * b).sum();
    let y = (e - cx1) / (d - cx2);
    let x = x1.iter().zip(&x2).map(|(a, b)| a - y * b).collect();
    (x, y)
}

pub(crate) struct Plain<'a> {
    pub disc: &'a Discretization,
}

impl System for Plain<'_> {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>, WaveError> {
        self.disc.residual(x)
    }

    fn step(&self, x: &[f64], r: &[f64]) -> Result<Vec<f64>, WaveError> {
        let (_, jac) = self.disc.linearize(x)?;
        let lu = jac.factor()?;
        let mut dx: Vec<f64> = r.iter().map(|v| -v).collect();
        lu.solve(&mut dx);
        Ok(dx)
    }

    fn min_slope(&self, x: &[f64]) -> f64 {
        self.disc.min_slope(x)
    }
}

/// Full-line system with a translation multiplier `a`: `R(w) + a e = 0`,
/// `e · w = 0`, where `e` is the antisymmetric surface difference at the crest.
struct Phased<'a> {
    disc: &'a Discretization,
    e: Vec<f64>,
}

impl<'a> Phased<'a> {
    fn new(disc: &'a Discretization) -> Self {
        let np = disc.grid.np;
        let c = disc.grid.center();
        let mut e = vec![0.0; disc.unknowns()];
        e[(c + 1) * np + np - 1] = 1.0;
        e[(c - 1) * np + np - 1] = -1.0;
        Self { disc, e }
    }
}

impl System for Phased<'_> {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>, WaveError> {
        let n = self.e.len();
        let (w, a) = (&x[..n], x[n]);
        let mut r = self.disc.residual(w)?;
        for (ri, ei) in r.iter_mut().zip(&self.e) {
            *ri += a * ei;
        }
        let ew: f64 = self.e.iter().zip(w).map(|(a, b)| a * b).sum();
        r.push(self.disc.pin_scale * ew);
        Ok(r)
    }

    fn step(&self, x: &[f64], r: &[f64]) -> Result<Vec<f64>, WaveError> {
        let n = self.e.len();
        let (_, jac) = self.disc.linearize(&x[..n])?;
        let lu = jac.factor()?;
        let f: Vec<f64> = r[..n].iter().map(|v| -v).collect();
        let c: Vec<f64> = self.e.iter().map(|v| self.disc.pin_scale * v).collect();
        let (mut dx, da) = bordered_solve(&lu, &self.e, &c, 0.0, &f, -r[n]);
        dx.push(da);
        Ok(dx)
    }

    fn min_slope(&self, x: &[f64]) -> f64 {
        self.disc.min_slope(&x[..self.e.len()])
    }
}

/// Decay mode used to shape the seed: `h = H + r φ(p) sech²(√μ q / 2)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Seed {
    pub mu: f64,
    pub phi: Vec<f64>,
}

impl From<&SturmSpectrum> for Seed {
    fn from(s: &SturmSpectrum) -> Self {
        Self {
            mu: s.mu1(),
            phi: s.phi1.clone(),
        }
    }
}

impl From<&DecayMode> for Seed {
    fn from(m: &DecayMode) -> Self {
        Self {
            mu: m.mu,
            phi: m.phi.clone(),
        }
    }
}

/// Amplitude `r` of the small-amplitude long-wave balance,
/// `r = (1 - 1/F²) / ∫ φ_p² / H_p dp`.
pub fn long_wave_amplitude(state: &AsymptoticState, seed: &Seed, froude: f64) -> f64 {
    let dp = state.dp;
    let vals: Vec<f64> = seed
        .phi
        .windows(2)
        .zip(state.height_p.windows(2))
        .map(|(f, hp)| {
            let d = (f[1] - f[0]) / dp;
            d * d * 0.5 * (1.0 / hp[0] + 1.0 / hp[1])
        })
        .collect();
    let integral: f64 = vals.iter().sum::<f64>() * dp;
    (1.0 - 1.0 / (froude * froude)) / integral
}

pub fn initial_guess(
    state: &AsymptoticState,
    seed: &Seed,
    r: f64,
    grid: &StripGrid,
) -> Result<HeightField, WaveError> {
    if !(seed.mu > 0.0) {
        return Err(WaveError::SubcriticalSeed { mu1: seed.mu });
    }
    if seed.phi.len() != grid.np || state.np != grid.np {
        return Err(WaveError::Grid("seed, state and grid disagree on np".into()));
    }
    let mut field = HeightField::trivial(grid, state);
    let k = 0.5 * seed.mu.sqrt();
    for i in 0..grid.ncols() {
        let s = 1.0 / (k * grid.q(i)).cosh();
        let amp = r * s * s;
        for j in 1..grid.np {
            let idx = field.index(i, j);
            field.w[idx] = amp * seed.phi[j];
        }
    }
    Ok(field)
}

/// Newton iteration from `guess`; the full-line mode adds a translation
/// constraint at the crest.
pub fn newton_solve(
    guess: HeightField,
    state: &AsymptoticState,
    sigma: f64,
    grid: &StripGrid,
    opts: &NewtonOptions,
) -> Result<WaveSolution, WaveError> {
    let disc = Discretization::new(state, grid, sigma)?;
    let tol = opts.tolerance(state);
    let barrier = opts.barrier_fraction * state.min_height_p();
    let (w, iters, norm) = if grid.symmetric_half {
        let c = damped_newton(&Plain { disc: &disc }, guess.w, tol, barrier, opts)?;
        (c.x, c.iters, c.residual_norm)
    } else {
        let sys = Phased::new(&disc);
        let mut x = guess.w;
        x.push(0.0);
        let mut c = damped_newton(&sys, x, tol, barrier, opts)?;
        c.x.pop();
        (c.x, c.iters, c.residual_norm)
    };
    let field = HeightField {
        ncols: grid.ncols(),
        np: grid.np,
        base: state.height.clone(),
        w,
    };
    // report the residual of the unaugmented system
    let residual_norm = max_norm(&disc.residual(&field.w)?).max(if grid.symmetric_half { norm } else { 0.0 });
    Ok(WaveSolution::new(*grid, field, state.clone(), sigma, residual_norm, iters, tol))
}
