//! Solitary waves of elevation on still water and on a linear shear flow.

use shearwave::shear::{ShearProfile, VelocitySpec};
use shearwave::wavesolve::{solve_wave, SolveConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SolveConfig::default();
    let flows = [
        ShearProfile::still_water(1.0, 1.05, 1.0)?,
        ShearProfile::still_water(1.0, 1.15, 1.0)?,
        ShearProfile::new(1.0, 1.3, 1.0, VelocitySpec::Linear { surface: 0.2, shear: 0.1 })?,
    ];
    for profile in &flows {
        let sol = solve_wave(profile, &cfg)?;
        println!(
            "F = {:.6}: max eta = {:.6}, {} Newton iterations, residual {:.2e}",
            sol.froude, sol.amplitude, sol.newton_iters, sol.residual_norm
        );
    }
    // with surface tension the subcritical branch carries depression waves
    let tension = SolveConfig { sigma: 1.0, ..cfg };
    let sol = solve_wave(&ShearProfile::still_water(1.0, 0.95, 1.0)?, &tension)?;
    println!("F = {:.6}, sigma = 1: trough eta = {:.6}", sol.froude, sol.extremum);
    Ok(())
}
