//! Self-contained evidence of violated laws.
//!
//! Every witness carries the observed sequences it relies on. `replays`
//! re-asks the oracle for each recorded choice and re-evaluates the pattern
//! from scratch, so a report can be audited without trusting the search.

use serde_json::{json, Value};

use crate::catalog::{Catalog, Frame, ProblemId};
use crate::io;
use crate::oracle::BehaviorOracle;
use crate::tree::{ChoiceTree, Step};
use crate::universe::{Alt, AltSet};

/// A menu sequence with the choices made along it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservedSequence {
    pub problems: Vec<ProblemId>,
    pub choices: Vec<Alt>,
}

impl ObservedSequence {
    pub fn from_steps(steps: &[Step]) -> ObservedSequence {
        let (problems, choices) = crate::tree::split_steps(steps);
        ObservedSequence { problems, choices }
    }

    pub fn single(problem: ProblemId, choice: Alt) -> ObservedSequence {
        ObservedSequence {
            problems: vec![problem],
            choices: vec![choice],
        }
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn last_problem(&self) -> ProblemId {
        *self.problems.last().expect("nonempty sequence")
    }

    pub fn last_choice(&self) -> Alt {
        *self.choices.last().expect("nonempty sequence")
    }

    /// Choices made in the first `k` periods.
    pub fn chosen_before(&self, k: usize) -> AltSet {
        AltSet::from_alts(self.choices[..k].iter().copied())
    }

    fn well_formed(&self, catalog: &Catalog) -> bool {
        !self.problems.is_empty()
            && self.problems.len() == self.choices.len()
            && self
                .problems
                .iter()
                .zip(&self.choices)
                .all(|(&p, &c)| p.index() < catalog.len() && catalog.mask(p).contains(c))
    }

    /// Does the oracle make exactly these choices?
    pub fn reproduces(&self, oracle: &dyn BehaviorOracle) -> bool {
        self.well_formed(oracle.catalog())
            && (0..self.len()).all(|k| {
                oracle.choose_at(&self.problems[..k], self.problems[k]) == Some(self.choices[k])
            })
    }

    pub fn to_json(&self, catalog: &Catalog) -> Value {
        let u = catalog.universe();
        json!({
            "menus": self.problems.iter().map(|&p| io::problem_json(catalog, p)).collect::<Vec<_>>(),
            "choices": self.choices.iter().map(|&c| u.label(c)).collect::<Vec<_>>(),
        })
    }

    pub fn describe(&self, catalog: &Catalog) -> String {
        let u = catalog.universe();
        self.problems
            .iter()
            .zip(&self.choices)
            .map(|(&p, &c)| format!("{}->{}", catalog.show(p), u.label(c)))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Evidence that `better` P `worse`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    /// `worse` chosen at `earlier`, then `better` chosen at `later` with
    /// `worse` available. This is also a switch `better` S `worse`.
    Switch {
        seq: ObservedSequence,
        earlier: usize,
        later: usize,
    },
    /// `better` chosen at `at` from a problem whose default choice is
    /// `worse`.
    OverDefault {
        seq: ObservedSequence,
        at: usize,
        default: ObservedSequence,
    },
}

impl Evidence {
    pub fn better(&self) -> Alt {
        match self {
            Evidence::Switch { seq, later, .. } => seq.choices[*later],
            Evidence::OverDefault { seq, at, .. } => seq.choices[*at],
        }
    }

    pub fn worse(&self) -> Alt {
        match self {
            Evidence::Switch { seq, earlier, .. } => seq.choices[*earlier],
            Evidence::OverDefault { default, .. } => default.choices[0],
        }
    }

    pub fn is_switch(&self) -> bool {
        matches!(self, Evidence::Switch { .. })
    }

    fn sequences(&self) -> Vec<&ObservedSequence> {
        match self {
            Evidence::Switch { seq, .. } => vec![seq],
            Evidence::OverDefault { seq, default, .. } => vec![seq, default],
        }
    }

    fn pattern(&self, catalog: &Catalog) -> bool {
        match self {
            Evidence::Switch { seq, earlier, later } => {
                earlier < later
                    && *later < seq.len()
                    && seq.choices[*earlier] != seq.choices[*later]
                    && catalog.mask(seq.problems[*later]).contains(seq.choices[*earlier])
            }
            Evidence::OverDefault { seq, at, default } => {
                *at < seq.len()
                    && default.len() == 1
                    && default.problems[0] == seq.problems[*at]
                    && default.choices[0] != seq.choices[*at]
            }
        }
    }

    pub fn replays(&self, oracle: &dyn BehaviorOracle) -> bool {
        self.sequences().iter().all(|s| s.reproduces(oracle)) && self.pattern(oracle.catalog())
    }

    pub fn to_json(&self, catalog: &Catalog) -> Value {
        let u = catalog.universe();
        match self {
            Evidence::Switch { seq, earlier, later } => json!({
                "clause": "switch",
                "better": u.label(self.better()),
                "worse": u.label(self.worse()),
                "sequence": seq.to_json(catalog),
                "earlier": earlier,
                "later": later,
            }),
            Evidence::OverDefault { seq, at, default } => json!({
                "clause": "over-default",
                "better": u.label(self.better()),
                "worse": u.label(self.worse()),
                "sequence": seq.to_json(catalog),
                "at": at,
                "default": default.to_json(catalog),
            }),
        }
    }
}

/// Evidence of a violated law.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// x at `h`, y over x at `i`, x over y at `j`.
    FlipFlop {
        seq: ObservedSequence,
        h: usize,
        i: usize,
        j: usize,
    },
    /// Within one sequence, x chosen with y present at `i` and y chosen with
    /// x present at `j`.
    Reversal {
        seq: ObservedSequence,
        i: usize,
        j: usize,
    },
    /// `extended` is (A₁..A_K, B); `base` is (A₁..A_{K-1}, B); `last` is
    /// (A₁..A_K). The final choice of `extended` matches neither.
    PastDependence {
        extended: ObservedSequence,
        base: ObservedSequence,
        last: ObservedSequence,
    },
    /// Dropping the last history menu changes the choice from B.
    PastIndependence {
        extended: ObservedSequence,
        base: ObservedSequence,
    },
    /// c₀(A) P y, yet y is chosen from A after some history.
    DefaultAttention {
        default: ObservedSequence,
        evidence: Evidence,
        deviation: ObservedSequence,
    },
    /// x chosen from B after a history although x is neither c₀(B) nor
    /// chosen before.
    UnexplainedChoice {
        seq: ObservedSequence,
        default: ObservedSequence,
    },
    /// The choice at `at` is never a default choice.
    NeverDefault { seq: ObservedSequence, at: usize },
    /// (A,B) gives (x,x) and (B,A) gives (y,y).
    MutualRepeat {
        ab: ObservedSequence,
        ba: ObservedSequence,
    },
    /// c₀(A) = x, some history makes y the choice from A, but no C gives
    /// (A,C,A) → (x,y,y).
    MissingReturnSwitch {
        default: ObservedSequence,
        deviation: ObservedSequence,
    },
    /// Two ever-chosen alternatives with no switch between them within
    /// `horizon`.
    MissingSwitch {
        first: ObservedSequence,
        first_at: usize,
        second: ObservedSequence,
        second_at: usize,
        horizon: usize,
    },
    /// x S y and y S x.
    SwitchBothWays { forward: Evidence, backward: Evidence },
    /// After histories where both x and y were chosen, B gives x once and y
    /// once.
    ConflictAfterBoth {
        first: ObservedSequence,
        second: ObservedSequence,
    },
    /// After one history that chose both x and y, x is chosen from B ∋ y and
    /// y from D ∋ x.
    CounterfactualAmongChosen {
        first: ObservedSequence,
        second: ObservedSequence,
    },
    /// x P y and y P x.
    RevealedBothWays { forward: Evidence, backward: Evidence },
    /// Two histories with equal chosen sets disagree on the same problem.
    HistoryEquivalence {
        first: ObservedSequence,
        second: ObservedSequence,
    },
    /// One history, two problems both containing x and y, x chosen from
    /// one and y from the other.
    CounterfactualWarp {
        first: ObservedSequence,
        second: ObservedSequence,
    },
    /// c₀(T) = x, c₀(T \ {y}) ≠ x, and y S x.
    Cla {
        full: ObservedSequence,
        reduced: ObservedSequence,
        evidence: Evidence,
    },
    /// y listed above (or recommended alongside) the default choice x of a
    /// framed problem, and y S x.
    FrameAxiom {
        default: ObservedSequence,
        evidence: Evidence,
    },
    /// The oracle's last choice differs from what a model predicts.
    Mismatch {
        seq: ObservedSequence,
        expected: Alt,
    },
}

fn same_prefix(a: &ObservedSequence, b: &ObservedSequence) -> bool {
    let k = a.len();
    k == b.len() && k >= 1 && a.problems[..k - 1] == b.problems[..k - 1]
}

impl Witness {
    pub fn kind(&self) -> &'static str {
        match self {
            Witness::FlipFlop { .. } => "flip-flop",
            Witness::Reversal { .. } => "reversal",
            Witness::PastDependence { .. } => "past-dependence",
            Witness::PastIndependence { .. } => "past-independence",
            Witness::DefaultAttention { .. } => "default-attention",
            Witness::UnexplainedChoice { .. } => "unexplained-choice",
            Witness::NeverDefault { .. } => "never-default",
            Witness::MutualRepeat { .. } => "mutual-repeat",
            Witness::MissingReturnSwitch { .. } => "missing-return-switch",
            Witness::MissingSwitch { .. } => "missing-switch",
            Witness::SwitchBothWays { .. } => "switch-both-ways",
            Witness::ConflictAfterBoth { .. } => "conflict-after-both",
            Witness::CounterfactualAmongChosen { .. } => "counterfactual-among-chosen",
            Witness::RevealedBothWays { .. } => "revealed-both-ways",
            Witness::HistoryEquivalence { .. } => "history-equivalence",
            Witness::CounterfactualWarp { .. } => "counterfactual-warp",
            Witness::Cla { .. } => "limited-attention",
            Witness::FrameAxiom { .. } => "frame-axiom",
            Witness::Mismatch { .. } => "mismatch",
        }
    }

    /// All sequences the witness relies on.
    pub fn sequences(&self) -> Vec<&ObservedSequence> {
        use Witness::*;
        match self {
            FlipFlop { seq, .. }
            | Reversal { seq, .. }
            | NeverDefault { seq, .. }
            | Mismatch { seq, .. } => vec![seq],
            PastDependence {
                extended,
                base,
                last,
            } => vec![extended, base, last],
            PastIndependence { extended, base } => vec![extended, base],
            DefaultAttention {
                default,
                evidence,
                deviation,
            } => {
                let mut v = vec![default, deviation];
                v.extend(evidence.sequences());
                v
            }
            UnexplainedChoice { seq, default } => vec![seq, default],
            MutualRepeat { ab, ba } => vec![ab, ba],
            MissingReturnSwitch { default, deviation } => vec![default, deviation],
            MissingSwitch { first, second, .. } => vec![first, second],
            SwitchBothWays { forward, backward } | RevealedBothWays { forward, backward } => {
                let mut v = forward.sequences();
                v.extend(backward.sequences());
                v
            }
            ConflictAfterBoth { first, second }
            | CounterfactualAmongChosen { first, second }
            | HistoryEquivalence { first, second }
            | CounterfactualWarp { first, second } => vec![first, second],
            Cla {
                full,
                reduced,
                evidence,
            } => {
                let mut v = vec![full, reduced];
                v.extend(evidence.sequences());
                v
            }
            FrameAxiom { default, evidence } => {
                let mut v = vec![default];
                v.extend(evidence.sequences());
                v
            }
        }
    }

    /// Re-queries the oracle and re-checks the violation pattern.
    pub fn replays(&self, oracle: &dyn BehaviorOracle) -> bool {
        self.sequences().iter().all(|s| s.reproduces(oracle)) && self.pattern(oracle)
    }

    fn pattern(&self, oracle: &dyn BehaviorOracle) -> bool {
        use Witness::*;
        let cat = oracle.catalog();
        let mask = |p: ProblemId| cat.mask(p);
        match self {
            FlipFlop { seq, h, i, j } => {
                let (h, i, j) = (*h, *i, *j);
                if !(h < i && i < j && j < seq.len()) {
                    return false;
                }
                let x = seq.choices[h];
                let y = seq.choices[i];
                y != x
                    && mask(seq.problems[i]).contains(x)
                    && mask(seq.problems[j]).contains(y)
                    && seq.choices[j] == x
            }
            Reversal { seq, i, j } => {
                let (i, j) = (*i, *j);
                i < j
                    && j < seq.len()
                    && seq.choices[i] != seq.choices[j]
                    && mask(seq.problems[i]).contains(seq.choices[j])
                    && mask(seq.problems[j]).contains(seq.choices[i])
            }
            PastDependence {
                extended,
                base,
                last,
            } => {
                let k = extended.len() - 1;
                if k == 0 || last.len() != k || base.len() != k {
                    return false;
                }
                let b = extended.last_problem();
                last.problems[..] == extended.problems[..k]
                    && base.problems[..k - 1] == extended.problems[..k - 1]
                    && base.last_problem() == b
                    && extended.last_choice() != base.last_choice()
                    && extended.last_choice() != last.last_choice()
            }
            PastIndependence { extended, base } => {
                let k = extended.len() - 1;
                k >= 1
                    && base.len() == k
                    && base.problems[..k - 1] == extended.problems[..k - 1]
                    && base.last_problem() == extended.last_problem()
                    && base.last_choice() != extended.last_choice()
            }
            DefaultAttention {
                default,
                evidence,
                deviation,
            } => {
                default.len() == 1
                    && deviation.last_problem() == default.problems[0]
                    && evidence.pattern(cat)
                    && evidence.better() == default.choices[0]
                    && evidence.worse() == deviation.last_choice()
            }
            UnexplainedChoice { seq, default } => {
                let x = seq.last_choice();
                seq.len() >= 2
                    && default.len() == 1
                    && default.problems[0] == seq.last_problem()
                    && default.choices[0] != x
                    && !seq.chosen_before(seq.len() - 1).contains(x)
            }
            NeverDefault { seq, at } => {
                *at < seq.len() && {
                    let x = seq.choices[*at];
                    cat.ids().all(|p| oracle.choose_at(&[], p).is_some_and(|c| c != x))
                }
            }
            MutualRepeat { ab, ba } => {
                ab.len() == 2
                    && ba.len() == 2
                    && ab.problems[0] == ba.problems[1]
                    && ab.problems[1] == ba.problems[0]
                    && ab.choices[0] == ab.choices[1]
                    && ba.choices[0] == ba.choices[1]
                    && ab.choices[0] != ba.choices[0]
            }
            MissingReturnSwitch { default, deviation } => {
                if default.len() != 1 || deviation.last_problem() != default.problems[0] {
                    return false;
                }
                let a = default.problems[0];
                let x = default.choices[0];
                let y = deviation.last_choice();
                y != x
                    && cat.ids().all(|c| {
                        let run = [
                            oracle.choose_at(&[], a),
                            oracle.choose_at(&[a], c),
                            oracle.choose_at(&[a, c], a),
                        ];
                        run != [Some(x), Some(y), Some(y)]
                    })
            }
            MissingSwitch {
                first,
                first_at,
                second,
                second_at,
                horizon,
            } => {
                if *first_at >= first.len() || *second_at >= second.len() {
                    return false;
                }
                let x = first.choices[*first_at];
                let y = second.choices[*second_at];
                if x == y || oracle.is_partial() {
                    return false;
                }
                let Ok(tree) = ChoiceTree::explore(oracle, *horizon) else {
                    return false;
                };
                let s = crate::identify::switches(&tree);
                !s.contains(x, y) && !s.contains(y, x)
            }
            SwitchBothWays { forward, backward } => {
                forward.is_switch()
                    && backward.is_switch()
                    && forward.pattern(cat)
                    && backward.pattern(cat)
                    && forward.better() == backward.worse()
                    && forward.worse() == backward.better()
            }
            RevealedBothWays { forward, backward } => {
                forward.pattern(cat)
                    && backward.pattern(cat)
                    && forward.better() == backward.worse()
                    && forward.worse() == backward.better()
            }
            ConflictAfterBoth { first, second } => {
                let x = first.last_choice();
                let y = second.last_choice();
                let both = AltSet::singleton(x).with(y);
                first.len() >= 2
                    && second.len() >= 2
                    && x != y
                    && first.last_problem() == second.last_problem()
                    && both.is_subset(first.chosen_before(first.len() - 1))
                    && both.is_subset(second.chosen_before(second.len() - 1))
            }
            CounterfactualAmongChosen { first, second } => {
                let x = first.last_choice();
                let y = second.last_choice();
                let both = AltSet::singleton(x).with(y);
                same_prefix(first, second)
                    && x != y
                    && mask(first.last_problem()).contains(y)
                    && mask(second.last_problem()).contains(x)
                    && both.is_subset(first.chosen_before(first.len() - 1))
            }
            HistoryEquivalence { first, second } => {
                first.last_problem() == second.last_problem()
                    && first.last_choice() != second.last_choice()
                    && first.chosen_before(first.len() - 1) == second.chosen_before(second.len() - 1)
            }
            CounterfactualWarp { first, second } => {
                let x = first.last_choice();
                let y = second.last_choice();
                let both = AltSet::singleton(x).with(y);
                same_prefix(first, second)
                    && x != y
                    && both.is_subset(mask(first.last_problem()))
                    && both.is_subset(mask(second.last_problem()))
            }
            Cla {
                full,
                reduced,
                evidence,
            } => {
                if full.len() != 1 || reduced.len() != 1 {
                    return false;
                }
                let t = mask(full.problems[0]);
                let r = mask(reduced.problems[0]);
                let removed = t.difference(r);
                removed.len() == 1
                    && r.is_subset(t)
                    && reduced.choices[0] != full.choices[0]
                    && evidence.is_switch()
                    && evidence.pattern(cat)
                    && evidence.worse() == full.choices[0]
                    && Some(evidence.better()) == removed.first()
            }
            FrameAxiom { default, evidence } => {
                if default.len() != 1 || !evidence.is_switch() || !evidence.pattern(cat) {
                    return false;
                }
                let x = default.choices[0];
                let y = evidence.better();
                evidence.worse() == x
                    && match &cat.problem(default.problems[0]).frame {
                        Some(f @ Frame::List(_)) => f.listed_above(y, x),
                        Some(Frame::Rec(s)) => s.contains(y),
                        _ => false,
                    }
            }
            Mismatch { seq, expected } => seq.last_choice() != *expected,
        }
    }

    pub fn to_json(&self, catalog: &Catalog) -> Value {
        use Witness::*;
        let u = catalog.universe();
        let body = match self {
            FlipFlop { seq, h, i, j } => json!({"sequence": seq.to_json(catalog), "h": h, "i": i, "j": j}),
            Reversal { seq, i, j } => json!({"sequence": seq.to_json(catalog), "i": i, "j": j}),
            PastDependence {
                extended,
                base,
                last,
            } => json!({
                "extended": extended.to_json(catalog),
                "without_last": base.to_json(catalog),
                "last": last.to_json(catalog),
            }),
            PastIndependence { extended, base } => json!({
                "extended": extended.to_json(catalog),
                "without_last": base.to_json(catalog),
            }),
            DefaultAttention {
                default,
                evidence,
                deviation,
            } => json!({
                "default": default.to_json(catalog),
                "revealed": evidence.to_json(catalog),
                "deviation": deviation.to_json(catalog),
            }),
            UnexplainedChoice { seq, default } => json!({
                "sequence": seq.to_json(catalog),
                "default": default.to_json(catalog),
            }),
            NeverDefault { seq, at } => json!({"sequence": seq.to_json(catalog), "at": at}),
            MutualRepeat { ab, ba } => json!({"first": ab.to_json(catalog), "second": ba.to_json(catalog)}),
            MissingReturnSwitch { default, deviation } => json!({
                "default": default.to_json(catalog),
                "deviation": deviation.to_json(catalog),
            }),
            MissingSwitch {
                first,
                first_at,
                second,
                second_at,
                horizon,
            } => json!({
                "first": first.to_json(catalog),
                "first_at": first_at,
                "second": second.to_json(catalog),
                "second_at": second_at,
                "horizon": horizon,
            }),
            SwitchBothWays { forward, backward } | RevealedBothWays { forward, backward } => json!({
                "forward": forward.to_json(catalog),
                "backward": backward.to_json(catalog),
            }),
            ConflictAfterBoth { first, second }
            | CounterfactualAmongChosen { first, second }
            | HistoryEquivalence { first, second }
            | CounterfactualWarp { first, second } => json!({
                "first": first.to_json(catalog),
                "second": second.to_json(catalog),
            }),
            Cla {
                full,
                reduced,
                evidence,
            } => json!({
                "full": full.to_json(catalog),
                "reduced": reduced.to_json(catalog),
                "switch": evidence.to_json(catalog),
            }),
            FrameAxiom { default, evidence } => json!({
                "default": default.to_json(catalog),
                "switch": evidence.to_json(catalog),
            }),
            Mismatch { seq, expected } => json!({
                "sequence": seq.to_json(catalog),
                "expected": u.label(*expected),
            }),
        };
        let mut v = json!({"kind": self.kind()});
        if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
            dst.extend(src);
        }
        v
    }
}
