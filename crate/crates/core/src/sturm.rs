//! Linearized eigenproblem
//!
//! ```text
//! (φ_p / H_p³)_p + μ φ / H_p = 0,   φ(-m) = 0,   φ_p(0) / H_p³(0) = g φ(0)
//! ```
//!
//! discretized by a symmetric finite-volume scheme on the p-grid of an
//! [`AsymptoticState`]: `K φ = μ M φ` with a lumped diagonal mass `M` and
//! the Robin condition folded into the last row of `K`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::banded::BandMatrix;
use crate::shear::AsymptoticState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SturmError {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("need at least 2 eigenvalues, asked for {0}")]
    TooFewEigenvalues(usize),
    #[error("no decaying mode with positive eigenfunction found below mu = {limit:.6e}")]
    NoDecayMode { limit: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SturmSpectrum {
    /// Smallest eigenvalues in increasing order.
    pub mu: Vec<f64>,
    /// Eigenfunction of `mu[0]` on the p-grid, `φ₁(-m) = 0`, `φ₁(0) = 1`.
    pub phi1: Vec<f64>,
    /// Decay exponent, midpoint of `(√μ₁, min(2√μ₁, √μ₂))`; absent unless `μ₂ > μ₁ > 0`.
    pub s1: Option<f64>,
    /// `φ₁_p(0)/H_p³(0) - g φ₁(0)` with a one-sided second-order difference.
    pub robin_residual: f64,
}

impl SturmSpectrum {
    pub fn mu1(&self) -> f64 {
        self.mu[0]
    }

    pub fn mu2(&self) -> f64 {
        self.mu[1]
    }

    /// Whether `φ₁ > 0` on `(-m, 0]`.
    pub fn phi1_positive(&self) -> bool {
        self.phi1[1..].iter().all(|v| *v > 0.0)
    }
}

/// Tridiagonal pencil `K - μ M` on the unknowns `φ_1 … φ_N`.
struct Pencil {
    /// `K_jj` for j = 1..=N.
    diag: Vec<f64>,
    /// `K_{j,j+1}` for j = 1..N.
    off: Vec<f64>,
    mass: Vec<f64>,
}

impl Pencil {
    fn new(state: &AsymptoticState) -> Result<Self, SturmError> {
        let np = state.np;
        let dp = state.dp;
        if state.height_p.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(SturmError::InvalidState("H_p must be positive and finite".into()));
        }
        // face coefficients 1/H_p³ from the secant slope of H
        let faces: Vec<f64> = state
            .height
            .windows(2)
            .map(|w| {
                let s = (w[1] - w[0]) / dp;
                1.0 / (s * s * s)
            })
            .collect();
        if faces.iter().any(|k| !k.is_finite() || *k <= 0.0) {
            return Err(SturmError::InvalidState("degenerate H spacing".into()));
        }
        let n = np - 1;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        let mut mass = vec![0.0; n];
        for j in 1..=n {
            let row = j - 1;
            let mut d = faces[j - 1] / dp;
            if j < n {
                d += faces[j] / dp;
                off[row] = -faces[j] / dp;
                mass[row] = dp / state.height_p[j];
            } else {
                d -= state.g();
                mass[row] = 0.5 * dp / state.height_p[j];
            }
            diag[row] = d;
        }
        Ok(Self { diag, off, mass })
    }

    fn len(&self) -> usize {
        self.diag.len()
    }

    /// Symmetric standard form `M^{-1/2} K M^{-1/2}`, dropping the last
    /// `drop` rows (used for the Dirichlet-top variant).
    fn standard(&self, drop: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.len() - drop;
        let s: Vec<f64> = self.mass[..n].iter().map(|m| 1.0 / m.sqrt()).collect();
        let a = (0..n).map(|i| self.diag[i] * s[i] * s[i]).collect();
        let b = (0..n.saturating_sub(1))
            .map(|i| self.off[i] * s[i] * s[i + 1])
            .collect();
        (a, b)
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(a, b)` below `x`.
fn sturm_count(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..a.len() {
        let b2 = if i == 0 { 0.0 } else { b[i - 1] * b[i - 1] };
        d = a[i] - x - if i == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (a[i].abs() + x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..a.len() {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i < b.len() { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    (lo, hi)
}

/// `k`-th smallest eigenvalue (0-based) by bisection on the Sturm count.
fn bisect_eigenvalue(a: &[f64], b: &[f64], k: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(a, b);
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(a, b, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvector of the tridiagonal `(a, b)` for an eigenvalue estimate `mu`.
fn inverse_iteration(a: &[f64], b: &[f64], mu: f64) -> Vec<f64> {
    let n = a.len();
    let (lo, hi) = gershgorin(a, b);
    let shift = mu - 1e-10 * (hi - lo).max(1e-300);
    let mut m = BandMatrix::zeros(n, 1, 1);
    for i in 0..n {
        m.set(i, i, a[i] - shift);
        if i + 1 < n {
            m.set(i, i + 1, b[i]);
            m.set(i + 1, i, b[i]);
        }
    }
    let lu = match m.factor() {
        Ok(lu) => lu,
        Err(_) => return vec![1.0; n],
    };
    let mut v = vec![1.0; n];
    for _ in 0..3 {
        lu.solve(&mut v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Smallest `n_eigs` eigenvalues and the normalized first eigenfunction.
pub fn solve_sturm(state: &AsymptoticState, n_eigs: usize) -> Result<SturmSpectrum, SturmError> {
    if n_eigs < 2 {
        return Err(SturmError::TooFewEigenvalues(n_eigs));
    }
    let pencil = Pencil::new(state)?;
    let (a, b) = pencil.standard(0);
    let count = n_eigs.min(a.len());
    let mu: Vec<f64> = (0..count).map(|k| bisect_eigenvalue(&a, &b, k)).collect();
    let v = inverse_iteration(&a, &b, mu[0]);
    let mut phi1 = Vec::with_capacity(state.np);
    phi1.push(0.0);
    phi1.extend(v.iter().zip(&pencil.mass).map(|(x, m)| x / m.sqrt()));
    let top = phi1[state.np - 1];
    if top == 0.0 || !top.is_finite() {
        return Err(SturmError::InvalidState("eigenfunction vanishes at the surface".into()));
    }
    phi1.iter_mut().for_each(|x| *x /= top);

    let robin_residual = robin_residual(state, &phi1, 0.0, mu[0]);
    let s1 = (mu[1] > mu[0] && mu[0] > 0.0).then(|| {
        let lo = mu[0].sqrt();
        let hi = (2.0 * lo).min(mu[1].sqrt());
        0.5 * (lo + hi)
    });
    Ok(SturmSpectrum {
        mu,
        phi1,
        s1,
        robin_residual,
    })
}

fn robin_residual(state: &AsymptoticState, phi: &[f64], sigma: f64, mu: f64) -> f64 {
    let n = state.np - 1;
    let dp = state.dp;
    let dphi = (3.0 * phi[n] - 4.0 * phi[n - 1] + phi[n - 2]) / (2.0 * dp);
    let hp = state.height_p[n];
    dphi / (hp * hp * hp) - (state.g() - sigma * mu) * phi[n]
}

/// Residuals of the physical-variable form of the eigenproblem.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EquivalenceResidual {
    /// max over interior nodes of `|(U-c)(φ̃_yy + μφ̃) - U_yy φ̃|`.
    pub interior: f64,
    /// `|(U-c)² φ̃_y(0) - (g + (U-c)U_y) φ̃(0)|`.
    pub boundary: f64,
    pub max: f64,
    /// `max` divided by `max |φ̃|`.
    pub relative: f64,
}

/// Maps `φ₁` to `φ̃(y) = (c - U(y)) φ₁(p(y))` on the streamline depths and
/// evaluates the equivalent equation in `y` with nonuniform differences.
pub fn physical_equivalence_check(
    state: &AsymptoticState,
    spectrum: &SturmSpectrum,
) -> EquivalenceResidual {
    let profile = &state.profile;
    let y = &state.depth;
    let n = state.np - 1;
    let mu = spectrum.mu1();
    let phit: Vec<f64> = y
        .iter()
        .zip(&spectrum.phi1)
        .map(|(&yy, &p)| profile.relative_speed(yy) * p)
        .collect();
    let mut interior: f64 = 0.0;
    for j in 1..n {
        let h0 = y[j] - y[j - 1];
        let h1 = y[j + 1] - y[j];
        let d2 = 2.0
            * (phit[j + 1] * h0 - phit[j] * (h0 + h1) + phit[j - 1] * h1)
            / (h0 * h1 * (h0 + h1));
        let umc = -profile.relative_speed(y[j]);
        let r = umc * (d2 + mu * phit[j]) - profile.u_yy(y[j]) * phit[j];
        interior = interior.max(r.abs());
    }
    // one-sided derivative at y = 0 through the last three nodes
    let (ya, yb, yc) = (y[n - 2], y[n - 1], y[n]);
    let (fa, fb, fc) = (phit[n - 2], phit[n - 1], phit[n]);
    let ha = yc - ya;
    let hb = yc - yb;
    let d1 = fa * hb / (ha * (ha - hb)) - fb * ha / (hb * (ha - hb))
        + fc * (ha + hb) / (ha * hb);
    let umc = -profile.relative_speed(0.0);
    let boundary =
        (umc * umc * d1 - (profile.g + umc * profile.u_y(0.0)) * phit[n]).abs();
    let max = interior.max(boundary);
    let scale = phit.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    EquivalenceResidual {
        interior,
        boundary,
        max,
        relative: max / scale,
    }
}

/// Decay mode with surface tension: smallest `μ > 0` whose eigenfunction is
/// positive, for the Robin coefficient `g - σμ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayMode {
    pub mu: f64,
    pub phi: Vec<f64>,
}

pub fn tension_decay_mode(state: &AsymptoticState, sigma: f64) -> Result<DecayMode, SturmError> {
    let pencil = Pencil::new(state)?;
    let n = pencil.len();
    // eigenvalues of the problem with φ(0) = 0 bound the first positive mode
    let (a, b) = pencil.standard(1);
    let limit = bisect_eigenvalue(&a, &b, 0);
    let shoot = |mu: f64| -> (f64, Vec<f64>) {
        let mut phi = vec![0.0; n + 1];
        phi[1] = 1.0;
        for j in 1..n {
            let r = j - 1;
            let lower = if j >= 2 { pencil.off[r - 1] * phi[j - 1] } else { 0.0 };
            phi[j + 1] = -(lower + (pencil.diag[r] - mu * pencil.mass[r]) * phi[j]) / pencil.off[r];
        }
        let r = n - 1;
        let f = pencil.off[r - 1] * phi[n - 1]
            + (pencil.diag[r] + sigma * mu - mu * pencil.mass[r]) * phi[n];
        (f, phi)
    };
    let scan = 4000;
    let mut prev = (0.0, shoot(0.0).0);
    for k in 1..scan {
        let mu = limit * k as f64 / scan as f64;
        let f = shoot(mu).0;
        if f == 0.0 || f.signum() != prev.1.signum() {
            let (mut lo, mut hi) = (prev.0, mu);
            let flo = prev.1;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = shoot(mid).0;
                if fm.signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 4.0 * f64::EPSILON * hi {
                    break;
                }
            }
            let root = 0.5 * (lo + hi);
            let (_, mut phi) = shoot(root);
            let top = phi[n];
            if root > 0.0 && top != 0.0 {
                phi.iter_mut().for_each(|x| *x /= top);
                if phi[1..].iter().all(|v| *v > 0.0) {
                    return Ok(DecayMode { mu: root, phi });
                }
            }
        }
        prev = (mu, f);
    }
    Err(SturmError::NoDecayMode { limit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shear::{build_asymptotic_state, ShearProfile};

    fn irrotational(c: f64, np: usize) -> AsymptoticState {
        let p = ShearProfile::still_water(1.0, c, 1.0).unwrap();
        build_asymptotic_state(&p, np).unwrap()
    }

    fn transcendental_root(f2: f64) -> f64 {
        // tan k = F² k on (0, π/2)
        let g = |k: f64| k.tan() - f2 * k;
        let (mut lo, mut hi) = (1e-9, std::f64::consts::FRAC_PI_2 - 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn irrotational_matches_transcendental_root() {
        let k = transcendental_root(1.44);
        assert!((k - 0.9293).abs() < 1e-3);
        let s = solve_sturm(&irrotational(1.2, 513), 2).unwrap();
        assert!((s.mu1() - k * k).abs() < 1e-5, "{} vs {}", s.mu1(), k * k);
        assert!(s.phi1_positive());
        assert!(s.robin_residual.abs() < 1e-4);
        let s1 = s.s1.unwrap();
        assert!(s1 > s.mu1().sqrt() && s1 < (2.0 * s.mu1().sqrt()).min(s.mu2().sqrt()));
    }

    #[test]
    fn critical_and_subcritical() {
        let s = solve_sturm(&irrotational(1.0, 257), 2).unwrap();
        assert!(s.mu1().abs() < 1e-8);
        let s = solve_sturm(&irrotational(0.9, 257), 2).unwrap();
        assert!(s.mu1() < 0.0);
        assert!(s.s1.is_none());
    }

    #[test]
    fn large_froude_limit() {
        let s = solve_sturm(&irrotational(10.0, 257), 2).unwrap();
        let limit = std::f64::consts::PI.powi(2) / 4.0;
        assert!(s.mu1() < limit && (limit - s.mu1()) / limit < 0.02);
    }

    #[test]
    fn equivalence_residual_irrotational() {
        let st = irrotational(1.2, 512);
        let s = solve_sturm(&st, 2).unwrap();
        let r = physical_equivalence_check(&st, &s);
        assert!(r.max < 1e-4, "{r:?}");
        let mut doubled = s.clone();
        doubled.phi1.iter_mut().for_each(|v| *v *= 2.0);
        let r2 = physical_equivalence_check(&st, &doubled);
        assert!((r2.relative - r.relative).abs() < 1e-12 + 1e-6 * r.relative);
    }

    #[test]
    fn tension_decay_irrotational_oracle() {
        // tan k = c² k / (g - σ k²), g = d = 1, σ = 1, c = 0.95
        let st = irrotational(0.95, 257);
        let mode = tension_decay_mode(&st, 1.0).unwrap();
        let f = |k: f64| k.tan() * (1.0 - k * k) - 0.9025 * k;
        let (mut lo, mut hi) = (1e-6, 0.999);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = 0.5 * (lo + hi);
        assert!((mode.mu - k * k).abs() < 1e-4 * k * k, "{} vs {}", mode.mu, k * k);
    }

    #[test]
    fn tension_mode_without_tension_is_the_first_eigenvalue() {
        let st = irrotational(1.1, 257);
        let mode = tension_decay_mode(&st, 0.0).unwrap();
        let s = solve_sturm(&st, 2).unwrap();
        assert!((mode.mu - s.mu1()).abs() < 1e-9 * s.mu1(), "{} vs {}", mode.mu, s.mu1());
        let gap = mode.phi.iter().zip(&s.phi1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-6, "{gap:e}");
    }
}
