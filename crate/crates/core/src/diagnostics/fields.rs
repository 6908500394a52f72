use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::numerics::{derivative4, simpson, trapezoid};
use crate::wavesolve::WaveSolution;

/// Derivatives of a full-line solution on its nodes.
///
/// `h_p = H_p + D w` and `h_q = D w` with fourth-order differences of the
/// stored deviation, so a flat field reproduces the asymptotic state exactly.
pub(crate) struct Fields {
    pub sol: WaveSolution,
    pub nq: usize,
    pub np: usize,
    pub dq: f64,
    pub dp: f64,
    pub hp: Vec<f64>,
    pub hq: Vec<f64>,
    pub eta: Vec<f64>,
    pub q: Vec<f64>,
}

impl Fields {
    pub fn new(sol: &WaveSolution) -> Self {
        let sol = sol.to_full_line();
        let nq = sol.grid.ncols();
        let np = sol.grid.np;
        let dq = sol.grid.dq();
        let dp = sol.state.dp;
        let f = &sol.field;
        let mut hp = vec![0.0; nq * np];
        for i in 0..nq {
            let d = derivative4(f.column(i), dp);
            for j in 0..np {
                hp[i * np + j] = sol.state.height_p[j] + d[j];
            }
        }
        let mut hq = vec![0.0; nq * np];
        let mut row = vec![0.0; nq];
        for j in 0..np {
            for (i, slot) in row.iter_mut().enumerate() {
                *slot = f.w(i, j);
            }
            for (i, v) in derivative4(&row, dq).into_iter().enumerate() {
                hq[i * np + j] = v;
            }
        }
        let eta = f.eta();
        let q = sol.q();
        Self {
            nq,
            np,
            dq,
            dp,
            hp,
            hq,
            eta,
            q,
            sol,
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> usize {
        i * self.np + j
    }

    /// Simpson in `p` on every column, then trapezoid in `q`.
    pub fn double_integral(&self, f: impl Fn(usize, usize) -> f64) -> f64 {
        let cols = self.column_integrals(f);
        trapezoid(&cols, self.dq)
    }

    pub fn column_integrals(&self, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        let mut vals = vec![0.0; self.np];
        (0..self.nq)
            .map(|i| {
                for (j, v) in vals.iter_mut().enumerate() {
                    *v = f(i, j);
                }
                simpson(&vals, self.dp)
            })
            .collect()
    }

    pub fn line_integral(&self, f: impl Fn(usize) -> f64) -> f64 {
        let vals: Vec<f64> = (0..self.nq).map(f).collect();
        trapezoid(&vals, self.dq)
    }

    pub fn min_hp(&self) -> (f64, usize) {
        self.hp
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |best, (k, &v)| if v < best.0 { (v, k) } else { best })
    }

    pub fn surface_slope(&self, i: usize) -> f64 {
        self.hq[self.at(i, self.np - 1)]
    }

    /// `(h_q / √(1 + h_q²))_q` along the surface.
    pub fn surface_curvature(&self) -> Vec<f64> {
        let tau: Vec<f64> = (0..self.nq)
            .map(|i| {
                let s = self.surface_slope(i);
                s / (1.0 + s * s).sqrt()
            })
            .collect();
        derivative4(&tau, self.dq)
    }

    pub fn check_slopes(&self) -> Result<(), DiagnosticsError> {
        let (v, k) = self.min_hp();
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(DiagnosticsError::Degenerate {
                min_hp: v,
                q: self.q[k / self.np],
                p: self.sol.state.p(k % self.np),
            })
        }
    }
}

/// Velocity field and surface recovered from the height function.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhysicalFields {
    pub q: Vec<f64>,
    pub np: usize,
    /// Streamline heights `y = h - d`, indexed `i * np + j`.
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub eta: Vec<f64>,
    pub sup_u: f64,
    pub sup_u_over_c: f64,
    /// `min (c - u) / (c - U(0))`.
    pub speed_margin: f64,
    pub min_hp: f64,
}

pub(crate) fn physical_from(fields: &Fields) -> PhysicalFields {
    let st = &fields.sol.state;
    let c = st.profile.c;
    let d = st.profile.d;
    let n = fields.nq * fields.np;
    let mut y = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    for i in 0..fields.nq {
        for j in 0..fields.np {
            let k = fields.at(i, j);
            let hp = fields.hp[k];
            y[k] = fields.sol.field.h(i, j) - d;
            u[k] = c - 1.0 / hp;
            v[k] = -fields.hq[k] / hp;
        }
    }
    let sup_u = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_hp = fields.hp.iter().copied().fold(0.0, f64::max);
    PhysicalFields {
        q: fields.q.clone(),
        np: fields.np,
        y,
        u,
        v,
        eta: fields.eta.clone(),
        sup_u,
        sup_u_over_c: sup_u / c,
        speed_margin: st.height_p[st.np - 1] / max_hp,
        min_hp: fields.min_hp().0,
    }
}

pub fn recover_physical(sol: &WaveSolution) -> Result<PhysicalFields, DiagnosticsError> {
    let fields = Fields::new(sol);
    fields.check_slopes()?;
    Ok(physical_from(&fields))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernoulliRecord {
    /// Max over the surface of `|P + σ κ|` with `P` from Bernoulli's law.
    pub surface_max: f64,
    pub relative: f64,
    /// Interior pressure re-substituted into Bernoulli's law.
    pub interior_max: f64,
    /// `g max η < λ/2`.
    pub surface_bound_holds: bool,
}

pub(crate) fn bernoulli_from(fields: &Fields) -> BernoulliRecord {
    let st = &fields.sol.state;
    let g = st.g();
    let d = st.profile.d;
    let lambda = st.bernoulli;
    let sigma = fields.sol.sigma;
    let kappa = surface_tension_curvature(fields, sigma);
    let top = fields.np - 1;
    let mut surface_max = 0.0_f64;
    let mut scale = 0.5 * lambda;
    for i in 0..fields.nq {
        let k = fields.at(i, top);
        let (hp, hq) = (fields.hp[k], fields.hq[k]);
        let kinetic = (1.0 + hq * hq) / (2.0 * hp * hp);
        let gy = g * (fields.sol.field.h(i, top) - d);
        let pressure = 0.5 * lambda - kinetic - gy;
        surface_max = surface_max.max((pressure + sigma * kappa[i]).abs());
        scale = scale.max(kinetic).max(gy.abs()).max((sigma * kappa[i]).abs());
    }
    let mut interior_max = 0.0_f64;
    for i in 0..fields.nq {
        for j in 0..fields.np {
            let k = fields.at(i, j);
            let (hp, hq) = (fields.hp[k], fields.hq[k]);
            let speed2 = (1.0 + hq * hq) / (hp * hp);
            let y = fields.sol.field.h(i, j) - d;
            let big_gamma = st.big_gamma[j];
            let pressure = 0.5 * lambda + big_gamma - 0.5 * speed2 - g * y;
            let back = pressure + 0.5 * speed2 + g * y - 0.5 * lambda - big_gamma;
            interior_max = interior_max.max(back.abs());
        }
    }
    let max_eta = fields.eta.iter().copied().fold(0.0, f64::max);
    BernoulliRecord {
        surface_max,
        relative: surface_max / scale,
        interior_max,
        surface_bound_holds: g * max_eta < 0.5 * lambda,
    }
}

fn surface_tension_curvature(fields: &Fields, sigma: f64) -> Vec<f64> {
    if sigma == 0.0 {
        vec![0.0; fields.nq]
    } else {
        fields.surface_curvature()
    }
}

pub fn bernoulli_residual(sol: &WaveSolution) -> BernoulliRecord {
    bernoulli_from(&Fields::new(sol))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowForce {
    /// `S` on every column, with the surface-tension momentum flux added back
    /// when `σ ≠ 0`.
    pub columns: Vec<f64>,
    /// `-2 ∫ γ H dp + λ d + g d²/2`.
    pub formula: f64,
    /// `max |S_i - S_j| / |S|`.
    pub column_deviation: f64,
    /// `max |S_i - formula| / |formula|`.
    pub formula_deviation: f64,
}

pub(crate) fn flow_force_from(fields: &Fields) -> FlowForce {
    let st = &fields.sol.state;
    let g = st.g();
    let d = st.profile.d;
    let lambda = st.bernoulli;
    let sigma = fields.sol.sigma;
    let mut columns = fields.column_integrals(|i, j| {
        let k = fields.at(i, j);
        let (hp, hq) = (fields.hp[k], fields.hq[k]);
        let h = fields.sol.field.h(i, j);
        ((1.0 - hq * hq) / (2.0 * hp * hp) - g * (h - d) + 0.5 * lambda + st.big_gamma[j]) * hp
    });
    if sigma != 0.0 {
        for (i, s) in columns.iter_mut().enumerate() {
            let t = fields.surface_slope(i);
            *s += sigma * t * t / (1.0 + t * t + (1.0 + t * t).sqrt());
        }
    }
    let gh: Vec<f64> = st.gamma.iter().zip(&st.height).map(|(a, b)| a * b).collect();
    let formula = -2.0 * simpson(&gh, st.dp) + lambda * d + 0.5 * g * d * d;
    let lo = columns.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = columns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let off = columns.iter().map(|s| (s - formula).abs()).fold(0.0, f64::max);
    FlowForce {
        column_deviation: (hi - lo) / formula.abs(),
        formula_deviation: off / formula.abs(),
        columns,
        formula,
    }
}

pub fn flow_force(sol: &WaveSolution) -> FlowForce {
    flow_force_from(&Fields::new(sol))
}
