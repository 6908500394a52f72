//! Closed forms for linear shear (constant vorticity) in the dimensionless
//! parameters `λ* = λ/(gd)` and `γ* = γd/√λ`.

use serde::{Deserialize, Serialize};

use super::{ShearError, ShearProfile, VelocitySpec};
use crate::verdict::BoundVerdict;

/// Upper end of the positive-vorticity range where the upper bound is available.
pub fn positive_gamma_threshold() -> f64 {
    1.0 - 3.0_f64.sqrt() / 2.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstVorticity {
    pub profile: ShearProfile,
    pub froude: f64,
    pub lambda_ratio: f64,
}

/// Linear profile with `c - U(y) = √(gdλ*) (1 + γ* y/d)`, choosing `U(0) = 0`.
pub fn const_vorticity_params(
    lambda_star: f64,
    gamma_star: f64,
    g: f64,
    d: f64,
) -> Result<ConstVorticity, ShearError> {
    if !(lambda_star > 0.0) {
        return Err(ShearError::InvalidParameter(format!(
            "lambda* must be positive, got {lambda_star}"
        )));
    }
    if !(gamma_star < 1.0) {
        return Err(ShearError::InvalidParameter(format!(
            "gamma* = {gamma_star} must be below 1 for U to stay below c"
        )));
    }
    let c = (g * d * lambda_star).sqrt();
    let profile = ShearProfile::new(
        g,
        c,
        d,
        VelocitySpec::Linear {
            surface: 0.0,
            shear: -c * gamma_star / d,
        },
    )?;
    Ok(ConstVorticity {
        profile,
        froude: (lambda_star * (1.0 - gamma_star)).sqrt(),
        lambda_ratio: 1.0 / (1.0 - gamma_star.max(0.0)),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstVorticityBounds {
    /// `λ*(1-γ*) > 1`.
    pub lower: BoundVerdict,
    /// `λ*(1-γ*) < 4` for `γ* ≤ 0`.
    pub upper_nonpositive: BoundVerdict,
    /// `λ*(1-8γ*+4γ*²)/(1-γ*) < 4` for `0 < γ* < 1-√3/2`.
    pub upper_positive: BoundVerdict,
    /// `max η / d` against the amplitude bound for the applicable range.
    /// Without a measured amplitude `lhs` is NaN and only `rhs` is meaningful.
    pub amplitude: BoundVerdict,
}

impl ConstVorticityBounds {
    pub fn all(&self) -> [&BoundVerdict; 4] {
        [
            &self.lower,
            &self.upper_nonpositive,
            &self.upper_positive,
            &self.amplitude,
        ]
    }
}

pub fn const_vorticity_bounds(
    lambda_star: f64,
    gamma_star: f64,
    relative_amplitude: Option<f64>,
) -> ConstVorticityBounds {
    let f2 = lambda_star * (1.0 - gamma_star);
    let lower = BoundVerdict::greater("lambda*(1-gamma*) > 1", f2, 1.0);
    let upper_nonpositive = if gamma_star <= 0.0 {
        BoundVerdict::less("lambda*(1-gamma*) < 4", f2, 4.0)
    } else {
        BoundVerdict::not_applicable("lambda*(1-gamma*) < 4", f2, "<", 4.0)
    };
    let positive_lhs = lambda_star * (1.0 - 8.0 * gamma_star + 4.0 * gamma_star * gamma_star)
        / (1.0 - gamma_star);
    let positive_range = gamma_star > 0.0 && gamma_star < positive_gamma_threshold();
    let name = "lambda*(1-8gamma*+4gamma*^2)/(1-gamma*) < 4";
    let upper_positive = if positive_range {
        BoundVerdict::less(name, positive_lhs, 4.0)
    } else {
        BoundVerdict::not_applicable(name, positive_lhs, "<", 4.0)
    };
    let amp_rhs = if gamma_star <= 0.0 {
        Some(2.0 / (1.0 - gamma_star))
    } else if positive_range {
        Some(2.0 * (1.0 - gamma_star) / (1.0 - 8.0 * gamma_star + 4.0 * gamma_star * gamma_star))
    } else {
        None
    };
    let lhs = relative_amplitude.unwrap_or(f64::NAN);
    let amplitude = match (amp_rhs, relative_amplitude) {
        (Some(rhs), Some(a)) => BoundVerdict::less("max eta / d", a, rhs),
        (Some(rhs), None) => BoundVerdict::not_applicable("max eta / d", lhs, "<", rhs),
        (None, _) => BoundVerdict::not_applicable("max eta / d", lhs, "<", f64::INFINITY),
    };
    ConstVorticityBounds {
        lower,
        upper_nonpositive,
        upper_positive,
        amplitude,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shear::{compute_froude, compute_lambda_ratio};
    use crate::verdict::Verdict;
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms_against_quadrature() {
        let cv = const_vorticity_params(3.0, 0.5, 1.0, 1.0).unwrap();
        assert_relative_eq!(cv.froude.powi(2), 1.5, epsilon = 1e-14);
        assert_relative_eq!(cv.lambda_ratio, 2.0);
        assert_relative_eq!(compute_froude(&cv.profile).unwrap().powi(2), 1.5, max_relative = 1e-10);
        assert_relative_eq!(compute_lambda_ratio(&cv.profile).unwrap().value, 2.0, max_relative = 1e-12);

        let cv = const_vorticity_params(1.0, -1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(compute_froude(&cv.profile).unwrap().powi(2), 2.0, max_relative = 1e-10);
        assert_eq!(compute_lambda_ratio(&cv.profile).unwrap().value, 1.0);

        let cv = const_vorticity_params(2.5, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(cv.froude.powi(2), 2.5);
        assert_eq!(cv.lambda_ratio, 1.0);
    }

    #[test]
    fn gamma_star_at_least_one_is_rejected() {
        assert!(const_vorticity_params(2.0, 1.0, 1.0, 1.0).is_err());
        assert!(const_vorticity_params(-1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn bound_examples() {
        let b = const_vorticity_bounds(2.0, 0.0, None);
        assert_eq!(b.lower.verdict, Verdict::Holds);
        assert_eq!(b.upper_nonpositive.verdict, Verdict::Holds);
        assert_eq!(b.upper_positive.verdict, Verdict::NotApplicable);

        let b = const_vorticity_bounds(10.0, 0.1, Some(0.3));
        assert_relative_eq!(b.upper_positive.lhs, 10.0 * 0.24 / 0.9, epsilon = 1e-13);
        assert_eq!(b.upper_positive.verdict, Verdict::Holds);
        assert_eq!(b.amplitude.verdict, Verdict::Holds);
        assert_relative_eq!(b.amplitude.rhs, 2.0 * 0.9 / 0.24, epsilon = 1e-13);

        let b = const_vorticity_bounds(2.0, 0.2, None);
        assert_eq!(b.upper_positive.verdict, Verdict::NotApplicable);
        assert_eq!(b.upper_nonpositive.verdict, Verdict::NotApplicable);
    }
}
