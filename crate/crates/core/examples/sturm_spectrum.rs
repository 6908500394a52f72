//! Decay eigenvalues of the linearized problem, compared with the
//! transcendental root for still water.

use shearwave::shear::{build_asymptotic_state, ShearProfile};
use shearwave::sturm::solve_sturm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = 1.2;
    let profile = ShearProfile::still_water(1.0, c, 1.0)?;
    // still water: tan k = c² k with μ = k²
    let (mut lo, mut hi) = (0.5_f64, 1.5_f64);
    for _ in 0..100 {
        let k = 0.5 * (lo + hi);
        if k.tan() < c * c * k {
            lo = k;
        } else {
            hi = k;
        }
    }
    println!("exact mu1 = {:.10}", lo * lo);
    for np in [65, 129, 257, 513, 1025] {
        let spectrum = solve_sturm(&build_asymptotic_state(&profile, np)?, 3)?;
        println!(
            "np = {np:5}: mu1 = {:.10}, mu2 = {:.6}, s1 = {:?}",
            spectrum.mu1(),
            spectrum.mu2(),
            spectrum.s1
        );
    }
    Ok(())
}
