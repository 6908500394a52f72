//! Physical fields, integral identities, bounds and shape checks evaluated on
//! a computed wave.

mod bounds;
mod fields;
mod identities;
mod shape;

pub use bounds::{check_bounds, BoundInputs};
pub use fields::{
    bernoulli_residual, flow_force, recover_physical, BernoulliRecord, FlowForce, PhysicalFields,
};
pub use identities::{
    identity_classic, identity_extra, identity_lower, identity_tension, FroudeForm,
    IdentityRecord, TensionIdentity, Term, VorticityCheck,
};
pub use shape::{predicted_rate, shape_checks, DecayFit, ShapeReport, FIT_FLOOR, MONOTONE_FLOOR};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::verdict::{BoundVerdict, Verdict};
use crate::wavesolve::WaveSolution;
use fields::Fields;
use identities::Integrals;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("degenerate height field: h_p = {min_hp:.6e} at q = {q:.6}, p = {p:.6}")]
    Degenerate { min_hp: f64, q: f64, p: f64 },
}

/// Pass/fail limits for `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Relative residual of every integral identity.
    pub identity: f64,
    pub flow_force: f64,
    /// Surface Bernoulli residual relative to its largest term.
    pub bernoulli: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            identity: 1e-3,
            flow_force: 1e-4,
            bernoulli: 5e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSummary {
    pub sup_u: f64,
    pub sup_u_over_c: f64,
    pub speed_margin: f64,
    pub min_hp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumRule {
    pub intermediate: IdentityRecord,
    /// `|intermediate + classic + extra|` over the largest term involved.
    pub combination_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub froude: f64,
    pub lambda_ratio: f64,
    pub bernoulli_constant: f64,
    pub sigma: f64,
    pub amplitude: f64,
    pub extremum: f64,
    /// `∫η dx`.
    pub mass: f64,
    /// `∫η² dx`.
    pub mass_eta2: f64,
    pub physical: PhysicalSummary,
    pub bernoulli: BernoulliRecord,
    pub flow_force: FlowForce,
    pub identity_lower: IdentityRecord,
    pub identity_classic: IdentityRecord,
    pub identity_extra: IdentityRecord,
    pub sum_rule: SumRule,
    /// `F² - 1 = (3/(2d)) ∫η²/∫η` for irrotational waves without tension.
    pub starr: Option<FroudeForm>,
    pub identity_tension: TensionIdentity,
    pub vorticity_check: Option<VorticityCheck>,
    pub bound_verdicts: Vec<BoundVerdict>,
    pub shape: ShapeReport,
    /// The field failed `min h_p > 0`; numbers are for inspection only.
    pub unvalidated: bool,
}

/// Full report; fails on a degenerate field.
pub fn diagnose(sol: &WaveSolution) -> Result<DiagnosticsReport, DiagnosticsError> {
    let fields = Fields::new(sol);
    fields.check_slopes()?;
    Ok(build(sol, fields, false))
}

/// Report for a field that may violate `min h_p > 0`; flagged unvalidated
/// when it does.
pub fn diagnose_audit(sol: &WaveSolution) -> DiagnosticsReport {
    let fields = Fields::new(sol);
    let bad = fields.check_slopes().is_err();
    build(sol, fields, bad)
}

fn build(sol: &WaveSolution, fields: Fields, unvalidated: bool) -> DiagnosticsReport {
    let rate = predicted_rate(sol);
    let shape = shape_checks(sol, rate.map_or(f64::NAN, |r| r * r));
    let tail_rate = shape.decay.as_ref().map(|f| f.rate).or(rate).unwrap_or(0.0);
    let it = Integrals::new(&fields, tail_rate);
    let phys = fields::physical_from(&fields);
    let lower = identities::lower_from(&fields, &it);
    let classic = identities::classic_from(&fields, &it);
    let extra = identities::extra_from(&fields, &it);
    let intermediate = identities::intermediate_from(&fields, &it);
    let scale = [&classic, &extra, &intermediate]
        .iter()
        .flat_map(|r| r.terms.iter().map(|t| t.value.abs()))
        .fold(0.0, f64::max);
    let gap = (intermediate.total + classic.total + extra.total).abs();
    let irrotational = sol.state.profile.is_irrotational();
    let froude_form = irrotational.then(|| identities::froude_form_from(&fields, &it));
    let mut bound_verdicts = check_bounds(&BoundInputs::from_solution(sol, Some(it.mass)));
    let hp_max = sol.state.max_height_p();
    bound_verdicts.push(BoundVerdict::at_most(
        "T2 <= max H_p^2 * extra form",
        it.positive_form,
        // equality up to rounding when H_p is constant
        hp_max * hp_max * it.extra_form * (1.0 + 1e-12),
    ));
    DiagnosticsReport {
        froude: sol.state.froude,
        lambda_ratio: sol.state.lambda_ratio.value,
        bernoulli_constant: sol.state.bernoulli,
        sigma: sol.sigma,
        amplitude: sol.amplitude,
        extremum: sol.extremum,
        mass: it.mass,
        mass_eta2: it.mass_eta2,
        physical: PhysicalSummary {
            sup_u: phys.sup_u,
            sup_u_over_c: phys.sup_u_over_c,
            speed_margin: phys.speed_margin,
            min_hp: phys.min_hp,
        },
        bernoulli: fields::bernoulli_from(&fields),
        flow_force: fields::flow_force_from(&fields),
        identity_tension: TensionIdentity {
            lower: lower.clone(),
            froude_form: froude_form.clone(),
        },
        identity_lower: lower,
        identity_classic: classic,
        identity_extra: extra,
        sum_rule: SumRule {
            intermediate,
            combination_gap: if scale > 0.0 { gap / scale } else { 0.0 },
        },
        starr: froude_form.filter(|_| sol.sigma == 0.0),
        vorticity_check: identities::vorticity_check_from(&fields, &it),
        bound_verdicts,
        shape,
        unvalidated,
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub verdict: String,
}

impl DiagnosticsReport {
    /// Residual checks as `(name, lhs, rhs, relative residual, limit)`; a
    /// limit of infinity marks a row that is reported but not applicable.
    fn residual_checks(&self, t: &Thresholds) -> Vec<(String, f64, f64, f64, f64)> {
        let mut out = Vec::new();
        for r in [
            &self.identity_lower,
            &self.identity_classic,
            &self.identity_extra,
            &self.sum_rule.intermediate,
        ] {
            let limit = if r.applicable { t.identity } else { f64::INFINITY };
            out.push((format!("identity {}", r.name), r.total, 0.0, r.relative_residual, limit));
        }
        out.push((
            "identity sum rule".into(),
            self.sum_rule.combination_gap,
            0.0,
            self.sum_rule.combination_gap,
            t.identity,
        ));
        if let Some(form) = &self.identity_tension.froude_form {
            if let (Some(res), Some(rel)) = (form.residual, form.relative_residual) {
                let name = if self.sigma == 0.0 { "froude form" } else { "froude form with tension" };
                out.push((name.into(), form.froude_sq_minus_one, form.froude_sq_minus_one - res, rel, t.identity));
            }
        }
        out.push((
            "flow force columns".into(),
            self.flow_force.columns.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            self.flow_force.columns.iter().copied().fold(f64::INFINITY, f64::min),
            self.flow_force.column_deviation,
            t.flow_force,
        ));
        out.push((
            "flow force formula".into(),
            self.flow_force.columns.first().copied().unwrap_or(0.0),
            self.flow_force.formula,
            self.flow_force.formula_deviation,
            t.flow_force,
        ));
        out.push((
            "bernoulli surface".into(),
            self.bernoulli.surface_max,
            0.0,
            self.bernoulli.relative,
            t.bernoulli,
        ));
        out
    }

    /// Names of every failed bound or residual over its limit.
    pub fn failures(&self, t: &Thresholds) -> Vec<String> {
        let mut out: Vec<String> = self
            .bound_verdicts
            .iter()
            .filter(|b| b.is_failure())
            .map(|b| b.name.clone())
            .collect();
        for (name, _, _, res, limit) in self.residual_checks(t) {
            if !(res <= limit) {
                out.push(name);
            }
        }
        if self.unvalidated {
            out.push("unvalidated field".into());
        }
        out
    }

    pub fn passes(&self, t: &Thresholds) -> bool {
        self.failures(t).is_empty()
    }

    pub fn rows(&self, t: &Thresholds) -> Vec<ReportRow> {
        let verdict = |v: Verdict| match v {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::NotApplicable => "not_applicable",
        };
        let mut rows: Vec<ReportRow> = self
            .bound_verdicts
            .iter()
            .map(|b| ReportRow {
                name: b.name.clone(),
                lhs: b.lhs,
                rhs: b.rhs,
                residual: b.margin(),
                verdict: if b.informational && b.verdict == Verdict::Fails {
                    "informational".into()
                } else {
                    verdict(b.verdict).into()
                },
            })
            .collect();
        for (name, lhs, rhs, res, limit) in self.residual_checks(t) {
            rows.push(ReportRow {
                name,
                lhs,
                rhs,
                residual: res,
                verdict: if limit.is_infinite() {
                    "not_applicable"
                } else if res <= limit {
                    "pass"
                } else {
                    "fail"
                }
                .into(),
            });
        }
        rows
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self, t: &Thresholds) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in self.rows(t) {
            w.serialize(row).expect("row serializes");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
    }
}
