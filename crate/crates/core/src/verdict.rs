use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    NotApplicable,
}

/// One inequality `lhs < rhs` (or `lhs > rhs`, see `relation`) with its outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundVerdict {
    pub name: String,
    pub lhs: f64,
    pub relation: String,
    pub rhs: f64,
    pub verdict: Verdict,
    /// Reported for context only; never fails a run.
    pub informational: bool,
}

impl BoundVerdict {
    pub fn less(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::build(name, lhs, "<", rhs, lhs < rhs)
    }

    pub fn greater(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::build(name, lhs, ">", rhs, lhs > rhs)
    }

    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::build(name, lhs, "<=", rhs, lhs <= rhs)
    }

    pub fn not_applicable(name: impl Into<String>, lhs: f64, relation: &str, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            relation: relation.to_string(),
            rhs,
            verdict: Verdict::NotApplicable,
            informational: false,
        }
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    /// An applicable, non-informational bound that does not hold.
    pub fn is_failure(&self) -> bool {
        !self.informational && self.verdict == Verdict::Fails
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    /// `rhs - lhs` for upper bounds and `lhs - rhs` for lower bounds, so a
    /// positive margin means the bound holds.
    pub fn margin(&self) -> f64 {
        if self.relation == ">" {
            self.lhs - self.rhs
        } else {
            self.rhs - self.lhs
        }
    }

    fn build(name: impl Into<String>, lhs: f64, relation: &str, rhs: f64, holds: bool) -> Self {
        Self {
            name: name.into(),
            lhs,
            relation: relation.to_string(),
            rhs,
            verdict: if holds { Verdict::Holds } else { Verdict::Fails },
            informational: false,
        }
    }
}
