//! Three-valued verdicts on behavioral laws.

use std::fmt;

use serde_json::{json, Value};

use crate::catalog::Catalog;
use crate::oracle::BehaviorOracle;
use crate::tree::ChoiceTree;
use crate::witness::Witness;

/// The laws the checkers know about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Law {
    WeakStability,
    PastDependence,
    DefaultAttention,
    FullStability,
    PastIndependence,
    /// One of the eight derived conditions, numbered 1 to 8.
    Condition(u8),
    LimitedAttention,
    ListFrame,
    RecFrame,
    Representation,
}

impl Law {
    pub fn id(self) -> String {
        match self {
            Law::WeakStability => "weak-stability".into(),
            Law::PastDependence => "past-dependence".into(),
            Law::DefaultAttention => "default-attention".into(),
            Law::FullStability => "full-stability".into(),
            Law::PastIndependence => "past-independence".into(),
            Law::Condition(k) => format!("condition-{k}"),
            Law::LimitedAttention => "limited-attention".into(),
            Law::ListFrame => "list-frame".into(),
            Law::RecFrame => "rec-frame".into(),
            Law::Representation => "representation".into(),
        }
    }

    /// Shortest horizon at which a pass can be certified.
    pub fn min_horizon(self) -> usize {
        match self {
            Law::WeakStability => 3,
            Law::Condition(4) => 3,
            Law::Condition(2) | Law::Condition(5) | Law::Representation => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Violated,
    /// No violation found, but the data cannot certify a pass.
    NotFalsified,
}

impl Verdict {
    pub fn id(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Violated => "violated",
            Verdict::NotFalsified => "not-falsified",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerdictReport {
    pub law: Law,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub horizon: usize,
}

impl VerdictReport {
    /// Violated when a witness was found. Otherwise pass only if the tree is
    /// complete and deep enough for the law.
    pub fn decide(law: Law, tree: &ChoiceTree, witness: Option<Witness>) -> VerdictReport {
        let verdict = match (&witness, tree.is_complete() && tree.horizon() >= law.min_horizon()) {
            (Some(_), _) => Verdict::Violated,
            (None, true) => Verdict::Pass,
            (None, false) => Verdict::NotFalsified,
        };
        VerdictReport {
            law,
            verdict,
            witness,
            horizon: tree.horizon(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }

    /// A report is self-evidencing when its witness replays on the oracle.
    pub fn replays(&self, oracle: &dyn BehaviorOracle) -> bool {
        self.witness.as_ref().is_none_or(|w| w.replays(oracle))
    }

    pub fn to_json(&self, catalog: &Catalog) -> Value {
        json!({
            "law": self.law.id(),
            "verdict": self.verdict.id(),
            "horizon": self.horizon,
            "witness": self.witness.as_ref().map(|w| w.to_json(catalog)),
        })
    }
}
