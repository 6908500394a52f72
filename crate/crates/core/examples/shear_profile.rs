//! Froude number, Λ and the Froude bounds for a few background flows.

use shearwave::shear::{build_asymptotic_state, const_vorticity_params, ShearProfile, VelocitySpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let flows = vec![
        ("still water, c = 1.1", ShearProfile::still_water(1.0, 1.1, 1.0)?),
        (
            "linear U, c = 1.3",
            ShearProfile::new(1.0, 1.3, 1.0, VelocitySpec::Linear { surface: 0.2, shear: 0.1 })?,
        ),
        (
            "sinusoidal U, c = 1.2",
            ShearProfile::new(
                1.0,
                1.2,
                1.0,
                VelocitySpec::Expression { expr: "0.1 + 0.05*math::sin(3*y)".into() },
            )?,
        ),
        ("constant vorticity, gamma* = 0.3", const_vorticity_params(2.0, 0.3, 1.0, 1.0)?.profile),
    ];
    for (name, profile) in flows {
        let st = build_asymptotic_state(&profile, 257)?;
        let lam = st.lambda_ratio.value;
        print!("{name}: m = {:.6}, F = {:.6}, Lambda = {:.6}", st.flux, st.froude, lam);
        if st.upper_bound_applies() {
            println!(", F < {:.6}", (1.0 - 0.75 * lam * lam).powf(-0.5));
        } else {
            println!(", no upper Froude bound");
        }
    }
    Ok(())
}
