//! Upstream shear flow and the x-independent quantities derived from it.
//!
//! A [`ShearProfile`] carries `(g, c, d, U)`. From it we compute the flux
//! `m`, the Froude number `F` (defined through `g ∫ dy/(c-U)²`), the ratio
//! `Λ`, and the [`AsymptoticState`]: the asymptotic height function `H(p)`
//! on a uniform grid in the stream-function coordinate `p ∈ [-m, 0]`
//! together with `H_p`, the vorticity function `γ(p)`, its antiderivative
//! `Γ(p)` and the weight `Φ(p) = ∫_{-m}^p H_p³`.

mod constant;
mod family;
mod velocity;

pub use constant::{
    const_vorticity_bounds, const_vorticity_params, positive_gamma_threshold, ConstVorticity,
    ConstVorticityBounds,
};
pub use family::{family_profile, FamilySpec, NORMALIZATION_TOL};
pub use velocity::{Velocity, VelocitySpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, gauss_legendre, hermite, simpson};

/// Panel count for profile quadratures (composite Simpson).
pub const QUADRATURE_INTERVALS: usize = 4096;

/// Default dense sample count for `sup U < c` and `Λ`.
pub const DENSE_SAMPLES: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShearError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid velocity samples: {0}")]
    InvalidSamples(String),
    #[error("invalid velocity expression: {0}")]
    Expression(String),
    #[error("invalid profile: c - U(y) = {relative_speed:.6e} at y = {y:.6} (U must stay below c)")]
    CriticalLayer { y: f64, relative_speed: f64 },
    #[error("invalid profile: U is not smooth near y = {y:.6}")]
    NotSmooth { y: f64 },
    #[error("normalization violated: g ∫ dy / U*² = {integral:.10} (must equal 1 within 1e-6)")]
    Normalization { integral: f64 },
    #[error("grid too small: {0}")]
    GridTooSmall(String),
}

/// Margin by which `U` stays below `c` on a dense sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    /// `min (c - U)` over the sample.
    pub min_relative_speed: f64,
    /// Depth where the minimum is attained.
    pub at_y: f64,
    /// `min (c - U) / c`.
    pub margin: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ProfileRecord {
    g: f64,
    c: f64,
    d: f64,
    #[serde(rename = "U")]
    u: VelocitySpec,
}

/// Upstream data `(g, c, d, U)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ProfileRecord", into = "ProfileRecord")]
pub struct ShearProfile {
    pub g: f64,
    pub c: f64,
    pub d: f64,
    spec: VelocitySpec,
    velocity: Velocity,
}

impl TryFrom<ProfileRecord> for ShearProfile {
    type Error = ShearError;

    fn try_from(r: ProfileRecord) -> Result<Self, Self::Error> {
        ShearProfile::new(r.g, r.c, r.d, r.u)
    }
}

impl From<ShearProfile> for ProfileRecord {
    fn from(p: ShearProfile) -> Self {
        ProfileRecord {
            g: p.g,
            c: p.c,
            d: p.d,
            u: p.spec,
        }
    }
}

impl PartialEq for ShearProfile {
    fn eq(&self, other: &Self) -> bool {
        self.g == other.g && self.c == other.c && self.d == other.d && self.spec == other.spec
    }
}

impl ShearProfile {
    /// Validates the parameters and checks `sup U < c` on a dense sample.
    pub fn new(g: f64, c: f64, d: f64, u: VelocitySpec) -> Result<Self, ShearError> {
        for (name, v) in [("g", g), ("c", c), ("d", d)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ShearError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let velocity = Velocity::compile(&u, c, d)?;
        let profile = Self {
            g,
            c,
            d,
            spec: u,
            velocity,
        };
        profile.admissibility(DENSE_SAMPLES)?;
        Ok(profile)
    }

    /// Irrotational profile `U ≡ 0`.
    pub fn still_water(g: f64, c: f64, d: f64) -> Result<Self, ShearError> {
        Self::new(g, c, d, VelocitySpec::Constant { value: 0.0 })
    }

    pub fn spec(&self) -> &VelocitySpec {
        &self.spec
    }

    pub fn velocity(&self) -> &Velocity {
        &self.velocity
    }

    pub fn u(&self, y: f64) -> f64 {
        self.velocity.value(y)
    }

    pub fn u_y(&self, y: f64) -> f64 {
        self.velocity.slope(y)
    }

    pub fn u_yy(&self, y: f64) -> f64 {
        self.velocity.curvature(y)
    }

    /// `c - U(y)`.
    pub fn relative_speed(&self, y: f64) -> f64 {
        self.c - self.velocity.value(y)
    }

    pub fn is_irrotational(&self) -> bool {
        self.velocity.is_constant()
    }

    pub fn has_constant_vorticity(&self) -> bool {
        self.velocity.is_linear()
    }

    /// Checks `c - U > 0` and finiteness of `U_y` on `samples + 1` equally
    /// spaced depths.
    pub fn admissibility(&self, samples: usize) -> Result<Admissibility, ShearError> {
        let n = samples.max(2);
        let dy = self.d / n as f64;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=n {
            let y = -self.d + k as f64 * dy;
            let s = self.relative_speed(y);
            if !s.is_finite() || !self.u_y(y).is_finite() {
                return Err(ShearError::NotSmooth { y });
            }
            if s < best.0 {
                best = (s, y);
            }
        }
        if !(best.0 > 0.0) {
            return Err(ShearError::CriticalLayer {
                y: best.1,
                relative_speed: best.0,
            });
        }
        Ok(Admissibility {
            min_relative_speed: best.0,
            at_y: best.1,
            margin: best.0 / self.c,
            samples: n,
        })
    }

    fn sample_relative_speed(&self, intervals: usize) -> Result<(Vec<f64>, f64), ShearError> {
        let h = self.d / intervals as f64;
        let mut out = Vec::with_capacity(intervals + 1);
        for k in 0..=intervals {
            let y = -self.d + k as f64 * h;
            let s = self.relative_speed(y);
            if !(s > 0.0) {
                return Err(ShearError::CriticalLayer {
                    y,
                    relative_speed: s,
                });
            }
            out.push(s);
        }
        Ok((out, h))
    }
}

/// `m = ∫_{-d}^0 (c - U) dy`, composite Simpson with [`QUADRATURE_INTERVALS`] panels.
pub fn compute_flux(profile: &ShearProfile) -> Result<f64, ShearError> {
    let (speed, h) = profile.sample_relative_speed(QUADRATURE_INTERVALS)?;
    Ok(simpson(&speed, h))
}

/// Froude number from `1/F² = g ∫_{-d}^0 dy / (c-U)²`.
pub fn compute_froude(profile: &ShearProfile) -> Result<f64, ShearError> {
    let (speed, h) = profile.sample_relative_speed(QUADRATURE_INTERVALS)?;
    let inv: Vec<f64> = speed.iter().map(|s| 1.0 / (s * s)).collect();
    let inv_f2 = profile.g * simpson(&inv, h);
    Ok(1.0 / inv_f2.sqrt())
}

/// `Λ = max_y (c-U(0)) / (c-U(y))` with the maximizing depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaRatio {
    pub value: f64,
    pub argmax_y: f64,
}

pub fn compute_lambda_ratio(profile: &ShearProfile) -> Result<LambdaRatio, ShearError> {
    compute_lambda_ratio_sampled(profile, DENSE_SAMPLES)
}

/// [`compute_lambda_ratio`] on `samples` intervals, refined by golden-section
/// search around the grid maximizer.
pub fn compute_lambda_ratio_sampled(
    profile: &ShearProfile,
    samples: usize,
) -> Result<LambdaRatio, ShearError> {
    let (speed, h) = profile.sample_relative_speed(samples.max(2))?;
    let top = speed[speed.len() - 1];
    let (k, _) = speed
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, &s)| if s < acc.1 { (k, s) } else { acc });
    let y_k = -profile.d + k as f64 * h;
    let lo = (y_k - h).max(-profile.d);
    let hi = (y_k + h).min(0.0);
    let y_star = golden_min(|y| profile.relative_speed(y), lo, hi);
    let (y_best, s_best) = [(y_k, speed[k]), (y_star, profile.relative_speed(y_star))]
        .into_iter()
        .fold((y_k, speed[k]), |acc, c| if c.1 < acc.1 { c } else { acc });
    Ok(LambdaRatio {
        value: top / s_best,
        argmax_y: y_best,
    })
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// One-dimensional functions of `p ∈ [-m, 0]` derived from the shear flow.
#[derive(Clone, Debug)]
pub struct AsymptoticState {
    pub profile: ShearProfile,
    /// Number of `p` nodes.
    pub np: usize,
    pub dp: f64,
    /// Mass flux `m`.
    pub flux: f64,
    pub froude: f64,
    pub lambda_ratio: LambdaRatio,
    /// Bernoulli constant `λ = (U(0) - c)²`.
    pub bernoulli: f64,
    /// Physical depth `y = H(p) - d` of each node's streamline.
    pub depth: Vec<f64>,
    /// `H(p_j)`; exactly 0 at the bed node and `d` at the surface node.
    pub height: Vec<f64>,
    /// `H_p(p_j) = 1 / (c - U(H - d))`.
    pub height_p: Vec<f64>,
    /// Vorticity function `γ(p) = -U_y` on the streamline.
    pub gamma: Vec<f64>,
    /// `Γ(p) = (1/H_p² - λ)/2`, so `Γ(0) = 0` and `Γ_p = γ`.
    pub big_gamma: Vec<f64>,
    /// `Φ(p) = ∫_{-m}^p H_p³`.
    pub phi: Vec<f64>,
    pub admissibility: Admissibility,
}

/// Builds the asymptotic state on `np` uniformly spaced `p` nodes.
pub fn build_asymptotic_state(
    profile: &ShearProfile,
    np: usize,
) -> Result<AsymptoticState, ShearError> {
    if np < 16 {
        return Err(ShearError::GridTooSmall(format!(
            "asymptotic state needs at least 16 p-nodes, got {np}"
        )));
    }
    let admissibility = profile.admissibility(4 * np)?;
    let d = profile.d;
    let speed = |y: f64| profile.relative_speed(y);

    // p(y) = -∫_y^0 (c-U) on a fine y-grid, then invert onto the p-grid.
    let ny = 4 * (np - 1);
    let hy = d / ny as f64;
    let ys: Vec<f64> = (0..=ny).map(|k| -d + k as f64 * hy).collect();
    let mut cum = vec![0.0; ny + 1];
    for k in 0..ny {
        cum[k + 1] = cum[k] + gauss_legendre(speed, ys[k], ys[k + 1]);
    }
    let m = cum[ny];
    let ps: Vec<f64> = cum.iter().map(|v| v - m).collect();
    let slopes: Vec<f64> = ys.iter().map(|&y| speed(y)).collect();
    if slopes.iter().any(|s| !(*s > 0.0)) {
        return Err(ShearError::CriticalLayer {
            y: admissibility.at_y,
            relative_speed: admissibility.min_relative_speed,
        });
    }

    let dp = m / (np - 1) as f64;
    let mut depth = vec![0.0; np];
    depth[0] = -d;
    depth[np - 1] = 0.0;
    for (j, slot) in depth.iter_mut().enumerate().take(np - 1).skip(1) {
        let target = -m + j as f64 * dp;
        let k = numerics::bracket(&ps, target);
        let mut y = hermite(
            ps[k],
            ps[k + 1],
            ys[k],
            ys[k + 1],
            1.0 / slopes[k],
            1.0 / slopes[k + 1],
            target,
        );
        for _ in 0..4 {
            let p_here = ps[k] + gauss_legendre(speed, ys[k], y);
            let step = (p_here - target) / speed(y);
            y -= step;
            if step.abs() < 1e-15 * d {
                break;
            }
        }
        *slot = y;
    }
    let height: Vec<f64> = depth
        .iter()
        .enumerate()
        .map(|(j, y)| if j + 1 == np { d } else { y + d })
        .collect();
    let height_p: Vec<f64> = depth.iter().map(|&y| 1.0 / speed(y)).collect();
    let bernoulli = {
        let s0 = speed(0.0);
        s0 * s0
    };
    let big_gamma: Vec<f64> = height_p
        .iter()
        .map(|hp| 0.5 * (1.0 / (hp * hp) - bernoulli))
        .collect();
    let gamma: Vec<f64> = depth.iter().map(|&y| -profile.u_y(y)).collect();
    let cubes: Vec<f64> = height_p.iter().map(|v| v * v * v).collect();
    let phi = numerics::cumulative(&cubes, dp);

    Ok(AsymptoticState {
        profile: profile.clone(),
        np,
        dp,
        flux: m,
        froude: compute_froude(profile)?,
        lambda_ratio: compute_lambda_ratio_sampled(profile, (4 * np).max(DENSE_SAMPLES))?,
        bernoulli,
        depth,
        height,
        height_p,
        gamma,
        big_gamma,
        phi,
        admissibility,
    })
}

impl AsymptoticState {
    pub fn p(&self, j: usize) -> f64 {
        -self.flux + j as f64 * self.dp
    }

    pub fn g(&self) -> f64 {
        self.profile.g
    }

    pub fn depth_scale(&self) -> f64 {
        self.profile.d
    }

    /// Froude number from `1/F² = g ∫_{-m}^0 H_p³ dp`.
    pub fn froude_from_height(&self) -> f64 {
        let cubes: Vec<f64> = self.height_p.iter().map(|v| v * v * v).collect();
        1.0 / (self.g() * numerics::simpson(&cubes, self.dp)).sqrt()
    }

    /// `max_j |1/H_p² - λ - 2Γ̃|` where `Γ̃(p) = -∫_p^0 γ` is integrated
    /// independently from the sampled vorticity.
    pub fn relation_residual(&self) -> f64 {
        let cum = numerics::cumulative(&self.gamma, self.dp);
        let total = cum[self.np - 1];
        self.height_p
            .iter()
            .zip(&cum)
            .map(|(hp, c)| {
                let integrated = c - total;
                (1.0 / (hp * hp) - self.bernoulli - 2.0 * integrated).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `g Φ(0) F²`, which equals 1.
    pub fn weight_endpoint(&self) -> f64 {
        self.g() * self.phi[self.np - 1] * self.froude * self.froude
    }

    pub fn min_height_p(&self) -> f64 {
        self.height_p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_height_p(&self) -> f64 {
        self.height_p.iter().copied().fold(0.0, f64::max)
    }

    /// `λ* = λ / (g d)`.
    pub fn lambda_star(&self) -> f64 {
        self.bernoulli / (self.g() * self.profile.d)
    }

    /// `γ* = γ d / √λ` evaluated at the surface.
    pub fn gamma_star(&self) -> f64 {
        self.gamma[self.np - 1] * self.profile.d / self.bernoulli.sqrt()
    }

    /// Whether `Λ < 2/√3`, the condition for the upper Froude bound.
    pub fn upper_bound_applies(&self) -> bool {
        self.lambda_ratio.value < 2.0 / 3.0_f64.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn linear(c_minus_u_top: f64, slope: f64, g: f64, d: f64) -> ShearProfile {
        // c - U(y) = c_minus_u_top + slope * y with c chosen as c_minus_u_top
        ShearProfile::new(
            g,
            c_minus_u_top,
            d,
            VelocitySpec::Linear {
                surface: 0.0,
                shear: -slope,
            },
        )
        .unwrap()
    }

    #[test]
    fn flux_examples() {
        let p = ShearProfile::still_water(1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(compute_flux(&p).unwrap(), 2.0, epsilon = 1e-13);
        let p = ShearProfile::still_water(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(compute_flux(&p).unwrap(), 1.0, epsilon = 1e-13);
        // c - U = √3 (1 + 0.5 y); antiderivative √3 (y + y²/4) from -1 to 0
        let s3 = 3.0_f64.sqrt();
        let p = linear(s3, 0.5 * s3, 1.0, 1.0);
        let oracle = 0.0 - s3 * (-1.0 + 0.25);
        assert_relative_eq!(compute_flux(&p).unwrap(), oracle, epsilon = 1e-12);
        assert_relative_eq!(oracle, 0.75 * s3, epsilon = 1e-15);
    }

    #[test]
    fn froude_examples() {
        let p = ShearProfile::still_water(1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(compute_froude(&p).unwrap(), 2.0, epsilon = 1e-12);
        let p = ShearProfile::still_water(9.81, 9.81_f64.sqrt() * 2.0_f64.sqrt(), 2.0).unwrap();
        assert_relative_eq!(compute_froude(&p).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn critical_layer_is_rejected() {
        let err = ShearProfile::new(
            1.0,
            1.0,
            1.0,
            VelocitySpec::Linear {
                surface: 0.5,
                shear: -1.0,
            },
        );
        assert!(matches!(err, Err(ShearError::CriticalLayer { .. })));
        let err = ShearProfile::new(1.0, 1.0, 1.0, VelocitySpec::Constant { value: 1.0 });
        assert!(matches!(err, Err(ShearError::CriticalLayer { .. })));
    }

    #[test]
    fn lambda_ratio_examples() {
        let p = ShearProfile::still_water(1.0, 2.0, 1.0).unwrap();
        assert_eq!(compute_lambda_ratio(&p).unwrap().value, 1.0);
        // U increasing toward the surface: maximum of U at y = 0
        let p = ShearProfile::new(
            1.0,
            2.0,
            1.0,
            VelocitySpec::Expression {
                expr: "0.5 * math::exp(y)".into(),
            },
        )
        .unwrap();
        assert_relative_eq!(compute_lambda_ratio(&p).unwrap().value, 1.0, epsilon = 1e-15);
        // interior maximum of U: refined maximizer
        let p = ShearProfile::new(
            1.0,
            2.0,
            1.0,
            VelocitySpec::Expression {
                expr: "0.8 - (y + 0.3123)^2".into(),
            },
        )
        .unwrap();
        let l = compute_lambda_ratio(&p).unwrap();
        let oracle = (2.0 - (0.8 - 0.3123 * 0.3123)) / 1.2;
        assert_relative_eq!(l.value, oracle, epsilon = 1e-12);
        assert!((l.argmax_y + 0.3123).abs() < 1e-6);
    }

    #[test]
    fn still_water_state() {
        let p = ShearProfile::still_water(1.0, 2.0, 1.0).unwrap();
        let s = build_asymptotic_state(&p, 33).unwrap();
        assert_relative_eq!(s.flux, 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.bernoulli, 4.0);
        for j in 0..s.np {
            assert_relative_eq!(s.height[j], s.p(j) / 2.0 + 1.0, epsilon = 1e-14);
            assert_relative_eq!(s.height_p[j], 0.5);
            assert_eq!(s.gamma[j], 0.0);
            assert!(s.big_gamma[j].abs() < 1e-15);
        }
        let inv = 1.0 / s.froude_from_height().powi(2);
        assert_relative_eq!(inv, 0.25, max_relative = 1e-8);
        assert_relative_eq!(1.0 / s.froude.powi(2), 0.25, max_relative = 1e-8);
    }

    #[test]
    fn constant_vorticity_state_has_linear_gamma() {
        // c - U = 1.5 (1 + 0.4 y): γ = -U_y = 0.6, Γ(p) = γ p
        let p = linear(1.5, 0.6, 1.0, 1.0);
        let s = build_asymptotic_state(&p, 65).unwrap();
        for j in 0..s.np {
            assert_relative_eq!(s.gamma[j], 0.6, epsilon = 1e-14);
            assert!((s.big_gamma[j] - 0.6 * s.p(j)).abs() < 1e-12);
        }
        assert_eq!(s.height[0], 0.0);
        assert_eq!(s.height[s.np - 1], 1.0);
    }

    #[test]
    fn grid_too_small() {
        let p = ShearProfile::still_water(1.0, 2.0, 1.0).unwrap();
        assert!(matches!(
            build_asymptotic_state(&p, 8),
            Err(ShearError::GridTooSmall(_))
        ));
    }

    #[test]
    fn profile_json_roundtrip() {
        let json = r#"{"g":9.81,"c":3.5,"d":1.0,"U":{"kind":"expression","expr":"0.2*y"}}"#;
        let p: ShearProfile = serde_json::from_str(json).unwrap();
        assert_eq!(p.c, 3.5);
        let back: ShearProfile = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(p, back);
        let bad = r#"{"g":9.81,"c":0.1,"d":1.0,"U":{"kind":"constant","value":0.2}}"#;
        assert!(serde_json::from_str::<ShearProfile>(bad).is_err());
    }
}
