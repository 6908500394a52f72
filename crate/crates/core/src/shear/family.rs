//! One-parameter family `U = c - F U*(y)` with `g ∫ dy / U*² = 1`.

use serde::{Deserialize, Serialize};

use super::{ShearError, ShearProfile, Velocity, VelocitySpec, QUADRATURE_INTERVALS};
use crate::numerics::simpson;

/// Tolerance on the normalization integral.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Fixed data of a family; the Froude number is the free parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub g: f64,
    pub c: f64,
    pub d: f64,
    pub ustar: VelocitySpec,
}

impl FamilySpec {
    /// `g ∫_{-d}^0 dy / U*(y)²`; errors if `U*` is not strictly positive.
    pub fn normalization_integral(&self) -> Result<f64, ShearError> {
        let v = Velocity::compile(&self.ustar, self.c, self.d)?;
        let n = QUADRATURE_INTERVALS;
        let h = self.d / n as f64;
        let mut vals = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let y = -self.d + k as f64 * h;
            let u = v.value(y);
            if !(u > 0.0) {
                return Err(ShearError::InvalidParameter(format!(
                    "U* must be strictly positive, got {u} at y = {y}"
                )));
            }
            vals.push(1.0 / (u * u));
        }
        Ok(self.g * simpson(&vals, h))
    }

    pub fn profile(&self, froude: f64) -> Result<ShearProfile, ShearError> {
        family_profile(&self.ustar, froude, self.g, self.c, self.d)
    }
}

/// Member of the family at Froude number `froude`.
pub fn family_profile(
    ustar: &VelocitySpec,
    froude: f64,
    g: f64,
    c: f64,
    d: f64,
) -> Result<ShearProfile, ShearError> {
    if !(froude > 0.0) {
        return Err(ShearError::InvalidParameter(format!(
            "Froude number must be positive, got {froude}"
        )));
    }
    let spec = FamilySpec {
        g,
        c,
        d,
        ustar: ustar.clone(),
    };
    let integral = spec.normalization_integral()?;
    if (integral - 1.0).abs() > NORMALIZATION_TOL {
        return Err(ShearError::Normalization { integral });
    }
    ShearProfile::new(
        g,
        c,
        d,
        VelocitySpec::Family {
            ustar: Box::new(ustar.clone()),
            froude,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shear::{compute_froude, compute_lambda_ratio};
    use approx::assert_relative_eq;

    #[test]
    fn constant_ustar() {
        let g: f64 = 9.81;
        let d = 2.0;
        let ustar = VelocitySpec::Constant { value: (g * d).sqrt() };
        for f in [0.7, 1.0, 1.3, 2.2] {
            let p = family_profile(&ustar, f, g, 5.0, d).unwrap();
            assert_relative_eq!(compute_froude(&p).unwrap(), f, max_relative = 1e-12);
        }
        let p = family_profile(&VelocitySpec::Constant { value: 1.0 }, 1.2, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(compute_lambda_ratio(&p).unwrap().value, 1.0);
    }

    #[test]
    fn normalization_error_reports_integral() {
        let err = family_profile(&VelocitySpec::Constant { value: 2.0 }, 1.2, 1.0, 2.0, 1.0);
        match err {
            Err(ShearError::Normalization { integral }) => assert_relative_eq!(integral, 0.25),
            other => panic!("unexpected {other:?}"),
        }
    }
}
