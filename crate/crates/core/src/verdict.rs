//! Outcomes of checking a conditional inequality `lhs ≤ rhs`.

use serde::Serialize;

/// Relative slack granted to floating point round-off when comparing sides.
pub const DEFAULT_REL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    /// The inequality failed although its hypotheses hold: a bug.
    Violated,
    /// The hypotheses were not satisfied, so nothing is claimed.
    HypothesisNotMet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::with_slack(name, lhs, rhs, DEFAULT_REL_SLACK)
    }

    pub fn with_slack(name: impl Into<String>, lhs: f64, rhs: f64, rel_slack: f64) -> Self {
        let ok = lhs <= rhs + rel_slack * rhs.abs();
        BoundCheck {
            name: name.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            verdict: if ok { Verdict::Holds } else { Verdict::Violated },
        }
    }

    /// A check whose claim is only made when `hypothesis_met`.
    pub fn conditional(name: impl Into<String>, lhs: f64, rhs: f64, hypothesis_met: bool) -> Self {
        let mut c = Self::new(name, lhs, rhs);
        if !hypothesis_met {
            c.verdict = Verdict::HypothesisNotMet;
        }
        c
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn is_violation(&self) -> bool {
        self.verdict == Verdict::Violated
    }
}

/// A computed object together with the inequalities certified about it.
#[derive(Debug, Clone)]
pub struct Checked<T> {
    pub value: T,
    pub checks: Vec<BoundCheck>,
    /// Set when degree caps dropped nonzero terms.
    pub truncated: bool,
}

impl<T> Checked<T> {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(BoundCheck::holds)
    }

    pub fn any_violation(&self) -> bool {
        self.checks.iter().any(BoundCheck::is_violation)
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}
