//! Pseudo-arclength continuation along a family of still-water flows
//! towards the wave of greatest height.

use shearwave::shear::{FamilySpec, VelocitySpec};
use shearwave::wavesolve::{continue_branch, ContinuationOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // U* = 1 on unit depth satisfies g ∫ dy / U*² = 1
    let family = FamilySpec { g: 1.0, c: 2.0, d: 1.0, ustar: VelocitySpec::Constant { value: 1.0 } };
    let opts = ContinuationOptions { np: 33, nq: 401, max_points: 30, ..ContinuationOptions::default() };
    let branch = continue_branch(&family, 1.02, 0.0, &opts)?;
    for p in &branch.points {
        println!(
            "F = {:.6}  max eta = {:.6}  sup u/c = {:.4}  iterations = {}",
            p.froude, p.amplitude, p.sup_u_over_c, p.iterations
        );
    }
    println!("stopped: {:?}", branch.endpoint);
    Ok(())
}
