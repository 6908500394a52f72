//! Integral identities, flow force, Bernoulli residual and bound verdicts
//! for a computed wave.

use shearwave::diagnostics::{diagnose, Thresholds};
use shearwave::shear::const_vorticity_params;
use shearwave::wavesolve::{solve_wave, SolveConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (f, gamma_star) = (1.1_f64, 0.3);
    let profile = const_vorticity_params(f * f / (1.0 - gamma_star), gamma_star, 1.0, 1.0)?.profile;
    let sol = solve_wave(&profile, &SolveConfig::default())?;
    let report = diagnose(&sol)?;
    let t = Thresholds::default();
    for row in report.rows(&t) {
        println!("{:<55} {:>14.6e} {:>14.6e}  {}", row.name, row.lhs, row.rhs, row.verdict);
    }
    println!("passes: {}", report.passes(&t));
    Ok(())
}
