use serde::{Deserialize, Serialize};

use crate::verdict::BoundVerdict;
use crate::wavesolve::WaveSolution;

/// Scalars the Froude and amplitude bounds are stated in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub g: f64,
    pub d: f64,
    pub froude: f64,
    pub lambda_ratio: f64,
    /// `λ = (c - U(0))²`.
    pub bernoulli: f64,
    pub max_eta: f64,
    /// Signed largest `|η|`.
    pub extremum: f64,
    /// `∫η`, when known.
    pub mass: Option<f64>,
    pub irrotational: bool,
    pub sigma: f64,
}

impl BoundInputs {
    pub fn from_solution(sol: &WaveSolution, mass: Option<f64>) -> Self {
        let st = &sol.state;
        Self {
            g: st.g(),
            d: st.profile.d,
            froude: st.froude,
            lambda_ratio: st.lambda_ratio.value,
            bernoulli: st.bernoulli,
            max_eta: sol.amplitude,
            extremum: sol.extremum,
            mass,
            irrotational: st.profile.is_irrotational(),
            sigma: sol.sigma,
        }
    }

    /// An irrotational elevation wave known only by `F` and `max η / d`.
    pub fn irrotational_datum(froude: f64, relative_amplitude: f64) -> Self {
        Self {
            g: 1.0,
            d: 1.0,
            froude,
            lambda_ratio: 1.0,
            bernoulli: froude * froude,
            max_eta: relative_amplitude,
            extremum: relative_amplitude,
            mass: None,
            irrotational: true,
            sigma: 0.0,
        }
    }
}

pub fn check_bounds(b: &BoundInputs) -> Vec<BoundVerdict> {
    let f = b.froude;
    let lam = b.lambda_ratio;
    let trivial = !(b.extremum.abs() >= 1e-10 * b.d);
    let elevation = b.extremum > 0.0;
    let with_tension = b.sigma != 0.0;
    let applies = lam < 2.0 / 3.0_f64.sqrt();
    let denom = 1.0 - 0.75 * lam * lam;
    let upper = if applies { denom.powf(-0.5) } else { f64::INFINITY };
    let amp_cap = if applies { 0.5 * lam * lam / denom } else { f64::INFINITY };
    let surface_speed = b.bernoulli / (2.0 * b.g * b.d);
    let rel_amp = b.max_eta / b.d;

    let mut out = Vec::new();
    let na = |name: &str, lhs: f64, rel: &str, rhs: f64| BoundVerdict::not_applicable(name, lhs, rel, rhs);

    if trivial {
        out.push(na("F != 1", f, "!=", 1.0));
    } else if elevation {
        out.push(BoundVerdict::greater("F > 1 (elevation)", f, 1.0));
    } else {
        out.push(BoundVerdict::less("F < 1 (depression)", f, 1.0));
    }

    match b.mass {
        Some(m) if !trivial && f > 1.0 => out.push(BoundVerdict::greater("mass > 0 (F > 1)", m, 0.0)),
        Some(m) if !trivial && f < 1.0 => out.push(BoundVerdict::less("mass < 0 (F < 1)", m, 0.0)),
        Some(m) => out.push(na("mass sign", m, "vs", 0.0)),
        None => {}
    }

    let name_upper = "F < (1 - 3 Lambda^2/4)^(-1/2)";
    let name_speed = "max eta/d < (c - U(0))^2/(2gd)";
    let name_chain = "(c - U(0))^2/(2gd) < Lambda^2/(2(1 - 3 Lambda^2/4))";
    let name_amp = "max eta/d < Lambda^2/(2(1 - 3 Lambda^2/4))";
    if trivial || with_tension {
        out.push(na(name_upper, f, "<", upper));
        out.push(na(name_speed, rel_amp, "<", surface_speed));
        out.push(na(name_chain, surface_speed, "<", amp_cap));
        out.push(na(name_amp, rel_amp, "<", amp_cap));
    } else {
        out.push(if applies {
            BoundVerdict::less(name_upper, f, upper)
        } else {
            na(name_upper, f, "<", upper)
        });
        out.push(BoundVerdict::less(name_speed, rel_amp, surface_speed));
        if applies {
            out.push(BoundVerdict::less(name_chain, surface_speed, amp_cap));
            out.push(BoundVerdict::less(name_amp, rel_amp, amp_cap));
        } else {
            out.push(na(name_chain, surface_speed, "<", amp_cap));
            out.push(na(name_amp, rel_amp, "<", amp_cap));
        }
    }

    if b.irrotational {
        if trivial || with_tension || !elevation {
            out.push(na("F < 2", f, "<", 2.0));
            out.push(na("F^2 < 1 + max eta/d", f * f, "<", 1.0 + rel_amp).informational());
        } else {
            out.push(BoundVerdict::less("F < 2", f, 2.0));
            out.push(BoundVerdict::less("F^2 < 1 + max eta/d", f * f, 1.0 + rel_amp).informational());
        }
    }
    out
}
