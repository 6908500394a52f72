//! Pseudo-arclength continuation along `U = c - F U*(y)` in `(F, amplitude)`.
//!
//! In the scaled coordinate `p = F p*` the interior equations do not depend
//! on `F` and the top rows see gravity `g/F²` and tension `σ/F²`. The branch
//! is therefore traced on one fixed scaled state; each converged point is
//! mapped back to the physical state at its `F` (the deviation `w` carries
//! over node by node) and re-verified there.

use serde::{Deserialize, Serialize};

use super::grid::{HeightField, StripGrid};
use super::newton::{
    bordered_solve, damped_newton, initial_guess, long_wave_amplitude, newton_solve, NewtonOptions,
    Plain, Seed, System,
};
use super::system::Discretization;
use super::{WaveError, WaveSolution};
use crate::shear::{build_asymptotic_state, AsymptoticState, FamilySpec, VelocitySpec};
use crate::sturm::solve_sturm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationOptions {
    pub np: usize,
    pub nq: usize,
    /// Half-length `L`; `None` means `length_factor / √μ₁` at the start.
    pub half_length: Option<f64>,
    pub length_factor: f64,
    /// `+1` to start towards larger `F`, `-1` towards smaller.
    pub direction: f64,
    /// Step in the `(a/d, F)` plane.
    pub ds: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    /// Stop after this many stored waves.
    pub max_points: usize,
    /// Stop once `min (c-u) / (c-U(0))` falls below this.
    pub stagnation_margin: f64,
    /// Stop once `F` exceeds this.
    pub froude_cap: f64,
    pub newton: NewtonOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            np: 65,
            nq: 801,
            half_length: None,
            length_factor: 40.0,
            direction: 1.0,
            ds: 0.02,
            ds_min: 1e-4,
            ds_max: 0.05,
            max_points: 40,
            stagnation_margin: 0.3,
            froude_cap: 5.0,
            newton: NewtonOptions {
                max_iters: 12,
                ..NewtonOptions::default()
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchEndpoint {
    TargetCount,
    /// `u` approaching `c` somewhere in the fluid.
    Stagnation,
    /// `F` beyond the cap.
    LargeFroude,
    /// Step size fell below `ds_min`.
    StepFloor,
}

#[derive(Clone, Debug)]
pub struct BranchPoint {
    pub froude: f64,
    pub amplitude: f64,
    pub arclength: f64,
    /// `sup u / c`.
    pub sup_u_over_c: f64,
    /// `min (c-u) / (c-U(0))`.
    pub speed_margin: f64,
    /// Newton iterations of the step that produced this point.
    pub iterations: usize,
    pub solution: WaveSolution,
}

#[derive(Clone, Debug)]
pub struct ContinuationBranch {
    pub family: FamilySpec,
    pub points: Vec<BranchPoint>,
    pub endpoint: BranchEndpoint,
    /// `Λ`, the same for every member of the family.
    pub lambda_ratio: f64,
}

impl ContinuationBranch {
    pub fn ustar(&self) -> &VelocitySpec {
        &self.family.ustar
    }
}

/// Scaled system with `F` as the last unknown and the arclength constraint.
struct Arclength<'a> {
    state: &'a AsymptoticState,
    grid: StripGrid,
    g: f64,
    sigma: f64,
    d: f64,
    crest: usize,
    /// Unit tangent `(a/d, F)` and the base point.
    tangent: (f64, f64),
    origin: (f64, f64),
    ds: f64,
}

impl Arclength<'_> {
    fn disc(&self, f: f64) -> Result<Discretization, WaveError> {
        Discretization::with_gravity(self.state, &self.grid, self.g / (f * f), self.sigma / (f * f))
    }

    fn constraint(&self, a: f64, f: f64) -> f64 {
        self.g * self.d
            * (self.tangent.0 * (a / self.d - self.origin.0)
                + self.tangent.1 * (f - self.origin.1)
                - self.ds)
    }
}

impl System for Arclength<'_> {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>, WaveError> {
        let n = x.len() - 1;
        let f = x[n];
        if !(f > 0.0) {
            return Err(WaveError::Continuation(format!("Froude number left (0, inf): {f}")));
        }
        let mut r = self.disc(f)?.residual(&x[..n])?;
        r.push(self.constraint(x[self.crest], f));
        Ok(r)
    }

    fn step(&self, x: &[f64], r: &[f64]) -> Result<Vec<f64>, WaveError> {
        let n = x.len() - 1;
        let f = x[n];
        let disc = self.disc(f)?;
        let (_, jac) = disc.linearize(&x[..n])?;
        let lu = jac.factor()?;
        let f3 = f * f * f;
        let rg = disc.gravity_derivative(&x[..n]);
        let rs = disc.sigma_derivative(&x[..n]);
        let r_f: Vec<f64> = rg
            .iter()
            .zip(&rs)
            .map(|(a, b)| -2.0 * self.g / f3 * a - 2.0 * self.sigma / f3 * b)
            .collect();
        let mut c = vec![0.0; n];
        c[self.crest] = self.g * self.tangent.0;
        let d = self.g * self.d * self.tangent.1;
        let rhs: Vec<f64> = r[..n].iter().map(|v| -v).collect();
        let (mut dx, df) = bordered_solve(&lu, &r_f, &c, d, &rhs, -r[n]);
        dx.push(df);
        Ok(dx)
    }

    fn min_slope(&self, x: &[f64]) -> f64 {
        let n = x.len() - 1;
        match self.disc(x[n].max(1e-12)) {
            Ok(d) => d.min_slope(&x[..n]),
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

struct Tracer<'a> {
    family: &'a FamilySpec,
    scaled: &'a AsymptoticState,
    grid: StripGrid,
    sigma: f64,
    opts: &'a ContinuationOptions,
    crest: usize,
    barrier: f64,
}

impl Tracer<'_> {
    fn tol(&self, f: f64) -> f64 {
        0.5 * self.opts.newton.tolerance(self.scaled) / (f * f).max(1.0)
    }

    fn solve_fixed(&self, w: Vec<f64>, f: f64) -> Result<(Vec<f64>, usize), WaveError> {
        let disc = Discretization::with_gravity(
            self.scaled,
            &self.grid,
            self.scaled.g() / (f * f),
            self.sigma / (f * f),
        )?;
        let conv = damped_newton(&Plain { disc: &disc }, w, self.tol(f), self.barrier, &self.opts.newton)?;
        Ok((conv.x, conv.iters))
    }

    /// Physical solution at `f` from scaled deviations, polished by Newton.
    fn physical(&self, w: Vec<f64>, f: f64) -> Result<WaveSolution, WaveError> {
        let profile = self.family.profile(f)?;
        let state = build_asymptotic_state(&profile, self.grid.np)?;
        let field = HeightField {
            ncols: self.grid.ncols(),
            np: self.grid.np,
            base: state.height.clone(),
            w,
        };
        newton_solve(field, &state, self.sigma, &self.grid, &self.opts.newton)
    }

    fn point(&self, sol: WaveSolution, arclength: f64, iterations: usize) -> BranchPoint {
        let dp = sol.state.dp;
        let max_hp = sol.field.max_hp(dp);
        let n = sol.state.np - 1;
        let speed_margin = sol.state.height_p[n] / max_hp;
        let sup_u_over_c = 1.0 - 1.0 / (sol.state.profile.c * max_hp);
        BranchPoint {
            froude: sol.froude,
            amplitude: sol.field.w(self.crest / self.grid.np, n),
            arclength,
            sup_u_over_c,
            speed_margin,
            iterations,
            solution: sol,
        }
    }
}

/// Traces the branch of the family starting from a wave at `f_start > 1`.
pub fn continue_branch(
    family: &FamilySpec,
    f_start: f64,
    sigma: f64,
    opts: &ContinuationOptions,
) -> Result<ContinuationBranch, WaveError> {
    let g = family.g;
    let d = family.d;
    let start_profile = family.profile(f_start)?;
    let start_state = build_asymptotic_state(&start_profile, opts.np)?;
    let spectrum = solve_sturm(&start_state, 2)?;
    let seed = Seed::from(&spectrum);
    if !(seed.mu > 0.0) {
        return Err(WaveError::SubcriticalSeed { mu1: seed.mu });
    }
    let half_length = opts
        .half_length
        .unwrap_or(opts.length_factor / seed.mu.sqrt());
    let grid = StripGrid::new(half_length, opts.nq, opts.np, true)?;
    let scaled = build_asymptotic_state(&family.profile(1.0)?, opts.np)?;
    let crest = grid.np - 1;
    let tracer = Tracer {
        family,
        scaled: &scaled,
        grid,
        sigma,
        opts,
        crest,
        barrier: opts.newton.barrier_fraction * scaled.min_height_p(),
    };

    let r = long_wave_amplitude(&start_state, &seed, f_start);
    let guess = initial_guess(&start_state, &seed, r, &grid)?;
    let (w0, it0) = tracer
        .solve_fixed(guess.w, f_start)
        .map_err(|e| WaveError::Continuation(format!("first solve at F = {f_start} failed: {e}")))?;
    let f1 = f_start + opts.direction.signum() * 0.25 * opts.ds;
    let (w1, it1) = tracer
        .solve_fixed(w0.clone(), f1)
        .map_err(|e| WaveError::Continuation(format!("second solve at F = {f1} failed: {e}")))?;

    let mut points = Vec::new();
    let mut arclength = 0.0;
    points.push(tracer.point(tracer.physical(w0.clone(), f_start)?, arclength, it0));
    let seg = |wa: &[f64], fa: f64, wb: &[f64], fb: f64| {
        let da = (wb[crest] - wa[crest]) / d;
        (da, fb - fa)
    };
    let (da, df) = seg(&w0, f_start, &w1, f1);
    arclength += da.hypot(df);
    points.push(tracer.point(tracer.physical(w1.clone(), f1)?, arclength, it1));

    let mut prev = (w0, f_start);
    let mut cur = (w1, f1);
    let mut ds = opts.ds;
    let lambda_ratio = start_state.lambda_ratio.value;

    let endpoint = loop {
        let last = points.last().expect("branch has points");
        if last.speed_margin < opts.stagnation_margin {
            break BranchEndpoint::Stagnation;
        }
        if last.froude > opts.froude_cap {
            break BranchEndpoint::LargeFroude;
        }
        if points.len() >= opts.max_points {
            break BranchEndpoint::TargetCount;
        }
        if ds < opts.ds_min {
            break BranchEndpoint::StepFloor;
        }
        let (da, df) = seg(&prev.0, prev.1, &cur.0, cur.1);
        let len = da.hypot(df);
        let tangent = (da / len, df / len);
        let ratio = ds / len;
        let mut x: Vec<f64> = cur
            .0
            .iter()
            .zip(&prev.0)
            .map(|(a, b)| a + ratio * (a - b))
            .collect();
        x.push(cur.1 + ds * tangent.1);
        let sys = Arclength {
            state: &scaled,
            grid,
            g,
            sigma,
            d,
            crest,
            tangent,
            origin: (cur.0[crest] / d, cur.1),
            ds,
        };
        let tol = tracer.tol(cur.1 + ds);
        match damped_newton(&sys, x, tol, tracer.barrier, &opts.newton) {
            Ok(conv) => {
                let mut x = conv.x;
                let f = x.pop().expect("froude entry");
                let (da, df) = seg(&cur.0, cur.1, &x, f);
                match tracer.physical(x.clone(), f) {
                    Ok(sol) => {
                        arclength += da.hypot(df);
                        points.push(tracer.point(sol, arclength, conv.iters));
                        prev = std::mem::replace(&mut cur, (x, f));
                        if conv.iters <= 4 {
                            ds = (1.5 * ds).min(opts.ds_max);
                        }
                    }
                    Err(_) => ds *= 0.5,
                }
            }
            Err(_) => ds *= 0.5,
        }
    };

    Ok(ContinuationBranch {
        family: family.clone(),
        points,
        endpoint,
        lambda_ratio,
    })
}
