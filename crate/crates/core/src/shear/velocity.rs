use std::fmt;
use std::sync::Arc;

use evalexpr::error::EvalexprResultValue;
use evalexpr::{
    build_operator_tree, Context, DefaultNumericTypes, EvalexprError, EvalexprResult,
    Node, Value,
};
use serde::{Deserialize, Serialize};

use super::ShearError;
use crate::numerics::CubicSpline;

/// Serializable description of an upstream velocity profile `U(y)`.
///
/// `Family` describes `U = c - F * U*(y)` for a fixed positive `U*`; the wave
/// speed `c` comes from the enclosing profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VelocitySpec {
    Constant {
        value: f64,
    },
    /// `U(y) = surface + shear * y`.
    Linear {
        surface: f64,
        shear: f64,
    },
    /// `(y, U)` pairs with strictly increasing `y`; natural cubic spline.
    Samples {
        points: Vec<[f64; 2]>,
    },
    /// Expression in the variable `y`, e.g. `"0.2 + 0.1*math::sin(3*y)"`.
    Expression {
        expr: String,
    },
    Family {
        ustar: Box<VelocitySpec>,
        froude: f64,
    },
}

/// Compiled form of a [`VelocitySpec`], cheap to clone and share.
#[derive(Clone)]
pub struct Velocity {
    inner: Arc<Compiled>,
}

enum Compiled {
    Constant(f64),
    Linear { surface: f64, shear: f64 },
    Spline(CubicSpline),
    Expr { node: Node<DefaultNumericTypes>, step: f64 },
    Family { ustar: Velocity, c: f64, froude: f64 },
}

impl fmt::Debug for Velocity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &*self.inner {
            Compiled::Constant(_) => "constant",
            Compiled::Linear { .. } => "linear",
            Compiled::Spline(_) => "samples",
            Compiled::Expr { .. } => "expression",
            Compiled::Family { .. } => "family",
        };
        write!(f, "Velocity({kind})")
    }
}

/// Single-variable evaluation context for `evalexpr`.
struct DepthContext {
    y: Value<DefaultNumericTypes>,
}

impl Context for DepthContext {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&Value<DefaultNumericTypes>> {
        (identifier == "y").then_some(&self.y)
    }

    fn call_function(
        &self,
        identifier: &str,
        _argument: &Value<DefaultNumericTypes>,
    ) -> EvalexprResultValue<DefaultNumericTypes> {
        Err(EvalexprError::FunctionIdentifierNotFound(identifier.to_string()))
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        false
    }

    fn set_builtin_functions_disabled(
        &mut self,
        _disabled: bool,
    ) -> EvalexprResult<(), DefaultNumericTypes> {
        Err(EvalexprError::BuiltinFunctionsCannotBeDisabled)
    }
}

fn eval_node(node: &Node<DefaultNumericTypes>, y: f64) -> f64 {
    let ctx = DepthContext { y: Value::Float(y) };
    // Expressions are validated at compile time, so a failure here can only
    // come from a runtime domain error (e.g. division by zero); surface it as NaN.
    node.eval_number_with_context(&ctx).unwrap_or(f64::NAN)
}

impl Velocity {
    /// Compile `spec` for a problem with wave speed `c` and depth `d`.
    pub fn compile(spec: &VelocitySpec, c: f64, d: f64) -> Result<Self, ShearError> {
        let compiled = match spec {
            VelocitySpec::Constant { value } => Compiled::Constant(*value),
            VelocitySpec::Linear { surface, shear } => Compiled::Linear {
                surface: *surface,
                shear: *shear,
            },
            VelocitySpec::Samples { points } => {
                if points.len() < 2 {
                    return Err(ShearError::InvalidSamples("need at least two samples".into()));
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(ShearError::InvalidSamples(
                        "sample depths must be strictly increasing".into(),
                    ));
                }
                let tol = 1e-12 * d.max(1.0);
                let first = points[0][0];
                let last = points[points.len() - 1][0];
                if first > -d + tol || last < -tol {
                    return Err(ShearError::InvalidSamples(format!(
                        "samples cover [{first}, {last}] but must cover [{}, 0]",
                        -d
                    )));
                }
                let x = points.iter().map(|p| p[0]).collect();
                let y = points.iter().map(|p| p[1]).collect();
                Compiled::Spline(CubicSpline::new(x, y))
            }
            VelocitySpec::Expression { expr } => {
                let node = build_operator_tree::<DefaultNumericTypes>(expr)
                    .map_err(|e| ShearError::Expression(format!("{expr}: {e}")))?;
                let probe = DepthContext { y: Value::Float(-0.5 * d) };
                node.eval_number_with_context(&probe)
                    .map_err(|e| ShearError::Expression(format!("{expr}: {e}")))?;
                Compiled::Expr {
                    node,
                    step: 1e-4 * d,
                }
            }
            VelocitySpec::Family { ustar, froude } => {
                if !(*froude > 0.0) {
                    return Err(ShearError::InvalidParameter(format!(
                        "family Froude number must be positive, got {froude}"
                    )));
                }
                Compiled::Family {
                    ustar: Velocity::compile(ustar, c, d)?,
                    c,
                    froude: *froude,
                }
            }
        };
        Ok(Self {
            inner: Arc::new(compiled),
        })
    }

    pub fn value(&self, y: f64) -> f64 {
        match &*self.inner {
            Compiled::Constant(v) => *v,
            Compiled::Linear { surface, shear } => surface + shear * y,
            Compiled::Spline(s) => s.eval(y),
            Compiled::Expr { node, .. } => eval_node(node, y),
            Compiled::Family { ustar, c, froude } => c - froude * ustar.value(y),
        }
    }

    /// `dU/dy`.
    pub fn slope(&self, y: f64) -> f64 {
        match &*self.inner {
            Compiled::Constant(_) => 0.0,
            Compiled::Linear { shear, .. } => *shear,
            Compiled::Spline(s) => s.deriv(y),
            Compiled::Expr { node, step } => {
                (eval_node(node, y + step) - eval_node(node, y - step)) / (2.0 * step)
            }
            Compiled::Family { ustar, froude, .. } => -froude * ustar.slope(y),
        }
    }

    /// `d²U/dy²`.
    pub fn curvature(&self, y: f64) -> f64 {
        match &*self.inner {
            Compiled::Constant(_) | Compiled::Linear { .. } => 0.0,
            Compiled::Spline(s) => s.deriv2(y),
            Compiled::Expr { node, step } => {
                let h = 10.0 * step;
                (eval_node(node, y + h) - 2.0 * eval_node(node, y) + eval_node(node, y - h))
                    / (h * h)
            }
            Compiled::Family { ustar, froude, .. } => -froude * ustar.curvature(y),
        }
    }

    /// True when `U` is constant by construction (irrotational flow).
    pub fn is_constant(&self) -> bool {
        match &*self.inner {
            Compiled::Constant(_) => true,
            Compiled::Linear { shear, .. } => *shear == 0.0,
            Compiled::Family { ustar, .. } => ustar.is_constant(),
            _ => false,
        }
    }

    /// True when `U` is affine in `y` by construction (constant vorticity).
    pub fn is_linear(&self) -> bool {
        match &*self.inner {
            Compiled::Constant(_) | Compiled::Linear { .. } => true,
            Compiled::Family { ustar, .. } => ustar.is_linear(),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape_matches_profile_schema() {
        let spec: VelocitySpec =
            serde_json::from_str(r#"{"kind":"linear","surface":0.0,"shear":-0.5}"#).unwrap();
        assert_eq!(
            spec,
            VelocitySpec::Linear {
                surface: 0.0,
                shear: -0.5
            }
        );
        let spec: VelocitySpec =
            serde_json::from_str(r#"{"kind":"samples","points":[[-1,0.1],[0,0.3]]}"#).unwrap();
        assert!(matches!(spec, VelocitySpec::Samples { .. }));
    }

    #[test]
    fn expression_derivatives_by_differences() {
        let v = Velocity::compile(
            &VelocitySpec::Expression {
                expr: "0.3*math::sin(2*y) + y*y".into(),
            },
            2.0,
            1.0,
        )
        .unwrap();
        let y = -0.4_f64;
        assert!((v.value(y) - (0.3 * (2.0 * y).sin() + y * y)).abs() < 1e-15);
        assert!((v.slope(y) - (0.6 * (2.0 * y).cos() + 2.0 * y)).abs() < 1e-8);
        assert!((v.curvature(y) - (-1.2 * (2.0 * y).sin() + 2.0)).abs() < 1e-5);
    }

    #[test]
    fn bad_expression_is_rejected() {
        let err = Velocity::compile(
            &VelocitySpec::Expression {
                expr: "0.3 * (".into(),
            },
            1.0,
            1.0,
        );
        assert!(matches!(err, Err(ShearError::Expression(_))));
        let err = Velocity::compile(&VelocitySpec::Expression { expr: "z + 1".into() }, 1.0, 1.0);
        assert!(matches!(err, Err(ShearError::Expression(_))));
    }

    #[test]
    fn samples_must_cover_depth() {
        let spec = VelocitySpec::Samples {
            points: vec![[-0.5, 0.0], [0.0, 0.1]],
        };
        assert!(matches!(
            Velocity::compile(&spec, 1.0, 1.0),
            Err(ShearError::InvalidSamples(_))
        ));
    }

    #[test]
    fn family_scales_ustar() {
        let spec = VelocitySpec::Family {
            ustar: Box::new(VelocitySpec::Linear {
                surface: 1.0,
                shear: 0.2,
            }),
            froude: 1.5,
        };
        let v = Velocity::compile(&spec, 3.0, 1.0).unwrap();
        assert!((v.value(-0.5) - (3.0 - 1.5 * 0.9)).abs() < 1e-15);
        assert!((v.slope(-0.5) + 0.3).abs() < 1e-15);
        assert!(v.is_linear() && !v.is_constant());
    }
}
