//! Bounded checks of the sequential-choice axioms and their consequences.
//!
//! Every check scans a [`ChoiceTree`] in lexicographic sequence order and
//! returns the first witness it meets. Trees built from oracles with
//! [`ChoiceTree::explore`] give pass/violated verdicts; trees built from
//! datasets give violated/not-falsified.

use std::collections::HashMap;
use std::ops::ControlFlow;

use serde_json::{json, Value};

use crate::catalog::{Catalog, ProblemId};
use crate::error::AatError;
use crate::identify::{reveal, RelationTable};
use crate::oracle::BehaviorOracle;
use crate::tree::{chosen_along, ChoiceTree, NodeId, Step};
use crate::universe::{Alt, AltSet};
use crate::verdict::{Law, VerdictReport};
use crate::witness::{Evidence, ObservedSequence, Witness};

fn seq(steps: &[Step]) -> ObservedSequence {
    ObservedSequence::from_steps(steps)
}

fn extend(steps: &[Step], problem: ProblemId, choice: Alt) -> ObservedSequence {
    let mut s = seq(steps);
    s.problems.push(problem);
    s.choices.push(choice);
    s
}

fn first_sequence<B>(tree: &ChoiceTree, f: impl FnMut(&[Step]) -> ControlFlow<B>) -> Option<B> {
    tree.for_each_sequence(f)
}

/// No flip-flops: x, then y over x, then x over y.
pub fn weak_stability(tree: &ChoiceTree) -> VerdictReport {
    let cat = tree.catalog();
    let w = first_sequence(tree, |path| {
        let j = path.len() - 1;
        let x = path[j].choice;
        for i in 1..j {
            let y = path[i].choice;
            if y == x || !cat.mask(path[i].problem).contains(x) || !cat.mask(path[j].problem).contains(y) {
                continue;
            }
            if let Some(h) = (0..i).find(|&h| path[h].choice == x) {
                return ControlFlow::Break(Witness::FlipFlop { seq: seq(path), h, i, j });
            }
        }
        ControlFlow::Continue(())
    });
    VerdictReport::decide(Law::WeakStability, tree, w)
}

/// c̃(A₁..A_K)(B) ∈ {c̃(A₁..A_{K-1})(B), c̃(A₁..A_{K-1})(A_K)}.
pub fn past_dependence(tree: &ChoiceTree) -> VerdictReport {
    let w = first_sequence(tree, |path| {
        let n = path.len();
        if n < 2 {
            return ControlFlow::Continue(());
        }
        let k = n - 1;
        let b = path[k].problem;
        let c = path[k].choice;
        let a_k = path[k - 1].choice;
        let Some(base) = tree.choose_after(&path[..k - 1], b) else {
            return ControlFlow::Continue(());
        };
        if c != base && c != a_k {
            ControlFlow::Break(Witness::PastDependence {
                extended: seq(path),
                base: extend(&path[..k - 1], b, base),
                last: seq(&path[..k]),
            })
        } else {
            ControlFlow::Continue(())
        }
    });
    VerdictReport::decide(Law::PastDependence, tree, w)
}

/// If c₀(A) P y then y is never chosen from A.
pub fn default_attention(tree: &ChoiceTree) -> VerdictReport {
    let (_, p) = reveal(tree);
    default_attention_with(tree, &p)
}

pub(crate) fn default_attention_with(tree: &ChoiceTree, p: &RelationTable) -> VerdictReport {
    let w = first_sequence(tree, |path| {
        let last = path[path.len() - 1];
        let Some(x) = tree.default_choice(last.problem) else {
            return ControlFlow::Continue(());
        };
        let y = last.choice;
        match p.first(x, y) {
            Some(ev) if y != x => ControlFlow::Break(Witness::DefaultAttention {
                default: ObservedSequence::single(last.problem, x),
                evidence: ev.clone(),
                deviation: seq(path),
            }),
            _ => ControlFlow::Continue(()),
        }
    });
    VerdictReport::decide(Law::DefaultAttention, tree, w)
}

/// Weak Stability, Past Dependence and Default Attention, in that order.
pub fn check_axioms(tree: &ChoiceTree) -> [VerdictReport; 3] {
    [weak_stability(tree), past_dependence(tree), default_attention(tree)]
}

/// The first violated axiom among the three, if any.
pub fn first_violation(tree: &ChoiceTree) -> Option<VerdictReport> {
    let ws = weak_stability(tree);
    if ws.violated() {
        return Some(ws);
    }
    let pd = past_dependence(tree);
    if pd.violated() {
        return Some(pd);
    }
    let da = default_attention(tree);
    da.violated().then_some(da)
}

pub fn check_weak_stability(source: &dyn BehaviorOracle, bound: usize) -> Result<VerdictReport, AatError> {
    Ok(weak_stability(&ChoiceTree::explore(source, bound)?))
}

pub fn check_past_dependence(source: &dyn BehaviorOracle, bound: usize) -> Result<VerdictReport, AatError> {
    Ok(past_dependence(&ChoiceTree::explore(source, bound)?))
}

pub fn check_default_attention(source: &dyn BehaviorOracle, bound: usize) -> Result<VerdictReport, AatError> {
    Ok(default_attention(&ChoiceTree::explore(source, bound)?))
}

/// Within one sequence, never x over y and later y over x.
pub fn full_stability(tree: &ChoiceTree) -> VerdictReport {
    let cat = tree.catalog();
    let w = first_sequence(tree, |path| {
        let j = path.len() - 1;
        let (bj, cj) = (cat.mask(path[j].problem), path[j].choice);
        (0..j)
            .find(|&i| {
                let ci = path[i].choice;
                ci != cj && bj.contains(ci) && cat.mask(path[i].problem).contains(cj)
            })
            .map_or(ControlFlow::Continue(()), |i| {
                ControlFlow::Break(Witness::Reversal { seq: seq(path), i, j })
            })
    });
    VerdictReport::decide(Law::FullStability, tree, w)
}

/// Dropping the last menu of a history never changes a choice.
pub fn past_independence(tree: &ChoiceTree) -> VerdictReport {
    let w = first_sequence(tree, |path| {
        let k = path.len() - 1;
        if k == 0 {
            return ControlFlow::Continue(());
        }
        let b = path[k].problem;
        match tree.choose_after(&path[..k - 1], b) {
            Some(c) if c != path[k].choice => ControlFlow::Break(Witness::PastIndependence {
                extended: seq(path),
                base: extend(&path[..k - 1], b, c),
            }),
            _ => ControlFlow::Continue(()),
        }
    });
    VerdictReport::decide(Law::PastIndependence, tree, w)
}

pub fn check_full_stability(source: &dyn BehaviorOracle, bound: usize) -> Result<VerdictReport, AatError> {
    Ok(full_stability(&ChoiceTree::explore(source, bound)?))
}

pub fn check_past_independence(source: &dyn BehaviorOracle, bound: usize) -> Result<VerdictReport, AatError> {
    Ok(past_independence(&ChoiceTree::explore(source, bound)?))
}

/// The eight derived conditions; reports are numbered 1 to 8 in order.
pub fn check_conditions(tree: &ChoiceTree) -> Vec<VerdictReport> {
    let (s, p) = reveal(tree);
    let ws = [
        condition_1(tree),
        condition_2(tree),
        condition_3(tree),
        condition_4(tree),
        condition_5(tree, &s),
        condition_6(tree, &s),
        condition_7(&p),
        condition_8(tree),
    ];
    ws.into_iter()
        .enumerate()
        .map(|(k, w)| {
            let mut r = VerdictReport::decide(Law::Condition(k as u8 + 1), tree, w);
            // Absence claims need every default choice; a partial tree can
            // only refute.
            if !tree.is_complete() && r.passed() {
                r.verdict = crate::verdict::Verdict::NotFalsified;
            }
            r
        })
        .collect()
}

pub fn check_conditions_oracle(oracle: &dyn BehaviorOracle, bound: usize) -> Result<Vec<VerdictReport>, AatError> {
    Ok(check_conditions(&ChoiceTree::explore(oracle, bound)?))
}

/// A choice after a history is the default or was chosen before.
fn condition_1(tree: &ChoiceTree) -> Option<Witness> {
    first_sequence(tree, |path| {
        let k = path.len() - 1;
        let last = path[k];
        if k == 0 || chosen_along(&path[..k]).contains(last.choice) {
            return ControlFlow::Continue(());
        }
        match tree.default_choice(last.problem) {
            Some(d) if d != last.choice => ControlFlow::Break(Witness::UnexplainedChoice {
                seq: seq(path),
                default: ObservedSequence::single(last.problem, d),
            }),
            _ => ControlFlow::Continue(()),
        }
    })
}

/// Anything ever chosen is a default choice somewhere.
fn condition_2(tree: &ChoiceTree) -> Option<Witness> {
    if !tree.is_complete() {
        return None;
    }
    let image = tree.default_image();
    first_sequence(tree, |path| {
        let j = path.len() - 1;
        if image.contains(path[j].choice) {
            ControlFlow::Continue(())
        } else {
            ControlFlow::Break(Witness::NeverDefault { seq: seq(path), at: j })
        }
    })
}

/// Not both (A,B) → (x,x) and (B,A) → (y,y) with x ≠ y.
fn condition_3(tree: &ChoiceTree) -> Option<Witness> {
    let cat = tree.catalog();
    for a in cat.ids() {
        for b in cat.ids().filter(|&b| b != a) {
            let (Some(ab), Some(ba)) = (tree.run(&[a, b]), tree.run(&[b, a])) else {
                continue;
            };
            if ab[0] == ab[1] && ba[0] == ba[1] && ab[0] != ba[0] {
                return Some(Witness::MutualRepeat {
                    ab: ObservedSequence { problems: vec![a, b], choices: ab },
                    ba: ObservedSequence { problems: vec![b, a], choices: ba },
                });
            }
        }
    }
    None
}

/// If c₀(A) = x and y ≠ x is ever chosen from A, some C gives (A,C,A) →
/// (x,y,y).
fn condition_4(tree: &ChoiceTree) -> Option<Witness> {
    if !tree.is_complete() || tree.horizon() < 3 {
        return None;
    }
    let cat = tree.catalog();
    let returns: Vec<AltSet> = cat
        .ids()
        .map(|a| {
            cat.ids().fold(AltSet::EMPTY, |acc, c| match tree.run(&[a, c, a]) {
                Some(r) if r[1] == r[2] && r[1] != r[0] => acc.with(r[1]),
                _ => acc,
            })
        })
        .collect();
    first_sequence(tree, |path| {
        let last = path[path.len() - 1];
        let x = tree.default_choice(last.problem);
        if x != Some(last.choice) && !returns[last.problem.index()].contains(last.choice) {
            ControlFlow::Break(Witness::MissingReturnSwitch {
                default: ObservedSequence::single(last.problem, x.expect("complete tree")),
                deviation: seq(path),
            })
        } else {
            ControlFlow::Continue(())
        }
    })
}

/// Any two ever-chosen alternatives are connected by a switch.
fn condition_5(tree: &ChoiceTree, s: &RelationTable) -> Option<Witness> {
    if !tree.is_complete() {
        return None;
    }
    let mut firsts: Vec<Option<(ObservedSequence, usize)>> = vec![None; tree.catalog().universe().len()];
    tree.for_each_sequence::<()>(|path| {
        let j = path.len() - 1;
        let slot = &mut firsts[path[j].choice.index()];
        if slot.is_none() {
            *slot = Some((seq(path), j));
        }
        ControlFlow::Continue(())
    });
    for (xi, fx) in firsts.iter().enumerate() {
        for (yi, fy) in firsts.iter().enumerate().skip(xi + 1) {
            let (Some((first, first_at)), Some((second, second_at))) = (fx, fy) else {
                continue;
            };
            let (x, y) = (Alt::from_index(xi), Alt::from_index(yi));
            if !s.contains(x, y) && !s.contains(y, x) {
                return Some(Witness::MissingSwitch {
                    first: first.clone(),
                    first_at: *first_at,
                    second: second.clone(),
                    second_at: *second_at,
                    horizon: tree.horizon(),
                });
            }
        }
    }
    None
}

fn switch_of(s: &RelationTable, x: Alt, y: Alt) -> Option<&Evidence> {
    s.evidence(x, y).iter().find(|e| e.is_switch())
}

fn condition_6(tree: &ChoiceTree, s: &RelationTable) -> Option<Witness> {
    // (1) no switches both ways.
    for (x, y) in s.pairs() {
        if x < y {
            if let (Some(f), Some(b)) = (switch_of(s, x, y), switch_of(s, y, x)) {
                return Some(Witness::SwitchBothWays {
                    forward: f.clone(),
                    backward: b.clone(),
                });
            }
        }
    }
    // (2) after histories that chose both x and y, a menu is decided one way.
    let mut seen: HashMap<(ProblemId, AltSet, Alt), ObservedSequence> = HashMap::new();
    let w = first_sequence(tree, |path| {
        let k = path.len() - 1;
        if k < 2 {
            return ControlFlow::Continue(());
        }
        let before = chosen_along(&path[..k]);
        let (b, x) = (path[k].problem, path[k].choice);
        if !before.contains(x) {
            return ControlFlow::Continue(());
        }
        for y in before.without(x).iter() {
            let key_pair = AltSet::singleton(x).with(y);
            if let Some(first) = seen.get(&(b, key_pair, y)) {
                return ControlFlow::Break(Witness::ConflictAfterBoth {
                    first: first.clone(),
                    second: seq(path),
                });
            }
            seen.entry((b, key_pair, x)).or_insert_with(|| seq(path));
        }
        ControlFlow::Continue(())
    });
    if w.is_some() {
        return w;
    }
    // (3) one history, both chosen: x from B ∋ y and y from D ∋ x.
    let cat = tree.catalog().clone();
    tree.for_each_node(|path, ids| {
        let h = chosen_along(path);
        if h.len() < 2 {
            return ControlFlow::Continue(());
        }
        let node: NodeId = *ids.last().unwrap();
        let answers: Vec<(ProblemId, Alt)> = tree.answers(node).filter(|&(_, c)| h.contains(c)).collect();
        for &(b, x) in &answers {
            for &(d, y) in &answers {
                if x != y && cat.mask(b).contains(y) && cat.mask(d).contains(x) {
                    return ControlFlow::Break(Witness::CounterfactualAmongChosen {
                        first: extend(path, b, x),
                        second: extend(path, d, y),
                    });
                }
            }
        }
        ControlFlow::Continue(())
    })
}

/// P is asymmetric.
fn condition_7(p: &RelationTable) -> Option<Witness> {
    p.pairs()
        .find(|&(x, y)| x < y && p.contains(y, x))
        .map(|(x, y)| Witness::RevealedBothWays {
            forward: p.evidence(x, y)[0].clone(),
            backward: p.evidence(y, x)[0].clone(),
        })
}

/// Histories with equal chosen sets induce the same one-shot function.
fn condition_8(tree: &ChoiceTree) -> Option<Witness> {
    let mut reps: HashMap<AltSet, (Vec<Step>, NodeId)> = HashMap::new();
    tree.for_each_node(|path, ids| {
        let node = *ids.last().unwrap();
        let h = chosen_along(path);
        match reps.get(&h) {
            None => {
                reps.insert(h, (path.to_vec(), node));
                ControlFlow::Continue(())
            }
            Some((rpath, rnode)) => {
                for (p, c) in tree.answers(node) {
                    if let Some(rc) = tree.choice(*rnode, p) {
                        if rc != c {
                            return ControlFlow::Break(Witness::HistoryEquivalence {
                                first: extend(rpath, p, rc),
                                second: extend(path, p, c),
                            });
                        }
                    }
                }
                ControlFlow::Continue(())
            }
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Inside one one-shot choice function c̃(h).
    Counterfactual,
    /// Between actual choices of one sequence.
    Realized,
}

/// A WARP violation with its pair: `first` chosen where `second` was
/// available, and the other way round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViolationRecord {
    pub kind: ViolationKind,
    pub pair: (Alt, Alt),
    /// `CounterfactualWarp` or `Reversal`.
    pub witness: Witness,
}

impl ViolationRecord {
    pub fn to_json(&self, catalog: &Catalog) -> Value {
        let u = catalog.universe();
        json!({
            "kind": match self.kind {
                ViolationKind::Counterfactual => "counterfactual",
                ViolationKind::Realized => "realized",
            },
            "pair": [u.label(self.pair.0), u.label(self.pair.1)],
            "witness": self.witness.to_json(catalog),
        })
    }
}

fn counterfactual_at(
    tree: &ChoiceTree,
    path: &[Step],
    node: NodeId,
    mut emit: impl FnMut(ViolationRecord) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let cat = tree.catalog();
    let answers: Vec<(ProblemId, Alt)> = tree.answers(node).collect();
    for (i, &(a, x)) in answers.iter().enumerate() {
        for &(b, y) in &answers[i + 1..] {
            let both = AltSet::singleton(x).with(y);
            if x != y && both.is_subset(cat.mask(a)) && both.is_subset(cat.mask(b)) {
                emit(ViolationRecord {
                    kind: ViolationKind::Counterfactual,
                    pair: (x, y),
                    witness: Witness::CounterfactualWarp {
                        first: extend(path, a, x),
                        second: extend(path, b, y),
                    },
                })?;
            }
        }
    }
    ControlFlow::Continue(())
}

/// Every counterfactual violation: per history, pairs of problems whose
/// choices contradict each other.
pub fn counterfactual_violations(tree: &ChoiceTree) -> Vec<ViolationRecord> {
    let mut out = Vec::new();
    tree.for_each_node::<()>(|path, ids| {
        counterfactual_at(tree, path, *ids.last().unwrap(), |r| {
            out.push(r);
            ControlFlow::Continue(())
        })
    });
    out
}

/// The first counterfactual violation in history pre-order.
pub fn first_counterfactual(tree: &ChoiceTree) -> Option<ViolationRecord> {
    let mut found = None;
    tree.for_each_node::<()>(|path, ids| {
        counterfactual_at(tree, path, *ids.last().unwrap(), |r| {
            found = Some(r);
            ControlFlow::Break(())
        })
    });
    found
}

/// Every realized violation: within-sequence reversals ending at the last
/// period of some sequence.
pub fn realized_violations(tree: &ChoiceTree) -> Vec<ViolationRecord> {
    let cat = tree.catalog();
    let mut out = Vec::new();
    tree.for_each_sequence::<()>(|path| {
        let j = path.len() - 1;
        let (bj, cj) = (cat.mask(path[j].problem), path[j].choice);
        for i in 0..j {
            let ci = path[i].choice;
            if ci != cj && bj.contains(ci) && cat.mask(path[i].problem).contains(cj) {
                out.push(ViolationRecord {
                    kind: ViolationKind::Realized,
                    pair: (ci, cj),
                    witness: Witness::Reversal { seq: seq(path), i, j },
                });
            }
        }
        ControlFlow::Continue(())
    });
    out
}

/// Counterfactual records first, then realized ones.
pub fn classify_violations(tree: &ChoiceTree) -> Vec<ViolationRecord> {
    let mut v = counterfactual_violations(tree);
    v.extend(realized_violations(tree));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::{oracle_from_dataset, ChoiceDataset, Observation};
    use crate::universe::Universe;
    use crate::verdict::Verdict;

    #[test]
    fn models_pass_every_axiom_and_condition() {
        for model in [fixtures::late_warp(), fixtures::worst_first(), fixtures::secret_menu()] {
            let tree = ChoiceTree::explore(&model, 4).unwrap();
            for r in check_axioms(&tree).iter().chain(check_conditions(&tree).iter()) {
                assert!(r.passed(), "{} failed: {:?}", r.law, r.witness);
            }
        }
    }

    #[test]
    fn short_horizon_cannot_certify_weak_stability() {
        let tree = ChoiceTree::explore(&fixtures::worst_first(), 2).unwrap();
        assert_eq!(weak_stability(&tree).verdict, Verdict::NotFalsified);
        assert!(past_dependence(&tree).passed());
    }

    #[test]
    fn flip_flop_is_caught_and_replays() {
        let base = fixtures::standard(&["x", "y", "z"]);
        let u = base.universe().clone();
        let a = |l| u.alt(l).unwrap();
        let oracle = fixtures::flip_flop(base, a("x"), a("y"), a("z"));
        let tree = ChoiceTree::explore(&oracle, 3).unwrap();
        let r = weak_stability(&tree);
        assert!(r.violated());
        assert!(r.replays(&oracle));
        let Some(Witness::FlipFlop { seq, .. }) = &r.witness else { panic!() };
        assert_eq!(seq.choices, vec![a("x"), a("y"), a("x")]);
        let c6 = &check_conditions(&tree)[5];
        assert!(c6.violated() && c6.replays(&oracle));
    }

    #[test]
    fn cross_sequence_conflict_is_not_a_flip_flop() {
        let u = Universe::new(["a", "b", "x", "y"]).unwrap();
        let m = |s: &[&str]| u.menu(s).unwrap();
        let a = |l| u.alt(l).unwrap();
        let xya = m(&["a", "x", "y"]);
        let xyb = m(&["b", "x", "y"]);
        let obs = vec![
            Observation::plain(vec![xya, xyb, xyb], vec![a("x"), a("b"), a("b")]),
            Observation::plain(vec![xyb, xya, xya], vec![a("y"), a("a"), a("a")]),
        ];
        let data = ChoiceDataset::new(u.clone(), obs).unwrap();
        let tree = ChoiceTree::from_dataset(&data).unwrap();
        assert_eq!(weak_stability(&tree).verdict, Verdict::NotFalsified);
        assert!(oracle_from_dataset(&data).is_ok());
    }

    #[test]
    fn late_warp_has_the_counterfactual_record() {
        let model = fixtures::late_warp();
        let u = model.universe().clone();
        let cat = model.catalog().clone();
        let tree = ChoiceTree::explore(&model, 4).unwrap();
        let yz = cat.find(u.menu(&["y", "z'"]).unwrap(), None).unwrap();
        let xy = cat.find(u.menu(&["x", "y"]).unwrap(), None).unwrap();
        let all = cat.find(u.menu(&["x", "y", "z", "z'"]).unwrap(), None).unwrap();
        let recs = counterfactual_violations(&tree);
        let hit = recs.iter().any(|r| match &r.witness {
            Witness::CounterfactualWarp { first, second } => {
                first.problems == [yz, xy] && second.problems == [yz, all] && r.pair == (u.alt("x").unwrap(), u.alt("y").unwrap())
            }
            _ => false,
        });
        assert!(hit);
        assert!(recs.iter().all(|r| r.witness.replays(&model)));
    }

    #[test]
    fn worst_first_only_realizes_violations() {
        let tree = ChoiceTree::explore(&fixtures::worst_first(), 4).unwrap();
        assert!(counterfactual_violations(&tree).is_empty());
        assert!(!realized_violations(&tree).is_empty());
        assert!(full_stability(&tree).violated());
        assert!(past_independence(&tree).violated());
    }
}
