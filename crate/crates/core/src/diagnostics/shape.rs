use serde::{Deserialize, Serialize};

use crate::numerics::{linear_fit, CubicSpline};
use crate::sturm::{solve_sturm, tension_decay_mode};
use crate::wavesolve::WaveSolution;

/// Tail values below this multiple of `d` are rounding noise and are left out
/// of the decay fit.
pub const FIT_FLOOR: f64 = 1e-12;
/// Increases smaller than this multiple of `d` do not count against
/// monotonicity.
pub const MONOTONE_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    /// `√μ₁` of the decay mode the solution was seeded from.
    pub predicted: f64,
    pub relative_gap: f64,
    pub points: usize,
    /// Fitted range of `q - q_crest`.
    pub window: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    /// Crest position from a parabola through the discrete extremum.
    pub crest_q: f64,
    /// `max |η(q_c + s) - η(q_c - s)|`.
    pub symmetry_error: f64,
    /// Grid points on either side of the crest where `|η|` does not decrease
    /// away from it.
    pub monotonicity_violations: usize,
    pub decay: Option<DecayFit>,
    pub decay_refused: Option<String>,
}

/// `√μ` of the decay mode for the solution's state and surface tension.
pub fn predicted_rate(sol: &WaveSolution) -> Option<f64> {
    let mu = if sol.sigma == 0.0 {
        solve_sturm(&sol.state, 2).ok()?.mu1()
    } else {
        tension_decay_mode(&sol.state, sol.sigma).ok()?.mu
    };
    (mu > 0.0).then(|| mu.sqrt())
}

pub fn shape_checks(sol: &WaveSolution, mu: f64) -> ShapeReport {
    let full = sol.to_full_line();
    let eta = full.eta();
    let q = full.q();
    let d = sol.state.profile.d;
    let dq = full.grid.dq();
    let n = eta.len();
    let sign = if sol.extremum < 0.0 { -1.0 } else { 1.0 };
    let e: Vec<f64> = eta.iter().map(|v| sign * v).collect();

    let k = (0..n).fold(0, |b, i| if e[i] > e[b] { i } else { b });
    let offset = if k == 0 || k + 1 == n {
        0.0
    } else {
        let curv = e[k - 1] - 2.0 * e[k] + e[k + 1];
        if curv < 0.0 {
            0.5 * (e[k - 1] - e[k + 1]) / curv
        } else {
            0.0
        }
    };
    let crest_q = q[k] + offset * dq;

    let reach = k.min(n - 1 - k);
    let symmetry_error = if offset == 0.0 {
        (1..=reach)
            .map(|i| (eta[k + i] - eta[k - i]).abs())
            .fold(0.0, f64::max)
    } else {
        let spline = CubicSpline::new(q.clone(), eta.clone());
        let lo = q[0];
        let hi = q[n - 1];
        (1..n)
            .map(|i| i as f64 * dq)
            .take_while(|s| crest_q - s >= lo && crest_q + s <= hi)
            .map(|s| (spline.eval(crest_q + s) - spline.eval(crest_q - s)).abs())
            .fold(0.0, f64::max)
    };

    let floor = MONOTONE_FLOOR * d;
    let right = (k + 1..n).filter(|&i| e[i] - e[i - 1] > floor).count();
    let left = (0..k).filter(|&i| e[i] - e[i + 1] > floor).count();

    let (decay, decay_refused) = fit_decay(&q, &e, k, crest_q, sol, mu);
    ShapeReport {
        crest_q,
        symmetry_error,
        monotonicity_violations: left + right,
        decay,
        decay_refused,
    }
}

fn fit_decay(
    q: &[f64],
    e: &[f64],
    crest: usize,
    crest_q: f64,
    sol: &WaveSolution,
    mu: f64,
) -> (Option<DecayFit>, Option<String>) {
    let d = sol.state.profile.d;
    if !(sol.amplitude.abs().max(sol.extremum.abs()) >= 1e-10 * d) {
        return (None, Some("amplitude below 1e-10 d".into()));
    }
    if !(mu > 0.0) {
        return (None, Some(format!("decay mode eigenvalue {mu:.3e} is not positive")));
    }
    let l = sol.grid.half_length;
    let (a, b) = (0.5 * l, 0.9 * l);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (crest..q.len())
        .filter(|&i| {
            let s = q[i] - crest_q;
            s >= a && s <= b && e[i] > FIT_FLOOR * d
        })
        .map(|i| (q[i] - crest_q, e[i].ln()))
        .unzip();
    if xs.len() < 5 {
        return (
            None,
            Some(format!("only {} tail points above the noise floor", xs.len())),
        );
    }
    let Some((slope, _)) = linear_fit(&xs, &ys) else {
        return (None, Some("degenerate fit".into()));
    };
    let predicted = mu.sqrt();
    let rate = -slope;
    (
        Some(DecayFit {
            rate,
            predicted,
            relative_gap: (rate - predicted).abs() / predicted,
            points: xs.len(),
            window: (xs[0], xs[xs.len() - 1]),
        }),
        None,
    )
}
