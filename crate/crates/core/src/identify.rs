//! Revealed relations, preference inference and attention bounds.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use serde_json::{json, Value};

use crate::axioms;
use crate::catalog::{Catalog, ProblemId};
use crate::error::AatError;
use crate::model::{AttentionFunction, Utility};
use crate::oracle::BehaviorOracle;
use crate::tree::ChoiceTree;
use crate::universe::{Alt, AltSet, Menu, Universe};
use crate::witness::{Evidence, ObservedSequence};

/// A binary relation on alternatives where every pair carries evidence.
/// At most one piece of evidence per clause (switch, over-default) is kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationTable {
    universe: Universe,
    entries: BTreeMap<(Alt, Alt), Vec<Evidence>>,
}

impl RelationTable {
    pub fn new(universe: &Universe) -> RelationTable {
        RelationTable {
            universe: universe.clone(),
            entries: BTreeMap::new(),
        }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    fn has_clause(&self, x: Alt, y: Alt, switch: bool) -> bool {
        self.entries
            .get(&(x, y))
            .is_some_and(|v| v.iter().any(|e| e.is_switch() == switch))
    }

    /// Records evidence for `better` over `worse` unless that clause is
    /// already witnessed.
    pub fn insert(&mut self, ev: Evidence) {
        let key = (ev.better(), ev.worse());
        if key.0 == key.1 || self.has_clause(key.0, key.1, ev.is_switch()) {
            return;
        }
        self.entries.entry(key).or_default().push(ev);
    }

    pub fn contains(&self, x: Alt, y: Alt) -> bool {
        self.entries.contains_key(&(x, y))
    }

    pub fn evidence(&self, x: Alt, y: Alt) -> &[Evidence] {
        self.entries.get(&(x, y)).map_or(&[], |v| v.as_slice())
    }

    pub fn first(&self, x: Alt, y: Alt) -> Option<&Evidence> {
        self.evidence(x, y).first()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Alt, Alt)> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pairs within `s`.
    pub fn restricted(&self, s: AltSet) -> Vec<(Alt, Alt)> {
        self.pairs().filter(|&(x, y)| s.contains(x) && s.contains(y)).collect()
    }

    /// Edge list with evidence, best first.
    pub fn to_json(&self, catalog: &Catalog) -> Value {
        let u = &self.universe;
        Value::Array(
            self.entries
                .iter()
                .map(|(&(x, y), evs)| {
                    json!({
                        "better": u.label(x),
                        "worse": u.label(y),
                        "witnesses": evs.iter().map(|e| e.to_json(catalog)).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }
}

/// Switches S and revealed preference P in one scan.
pub fn reveal(tree: &ChoiceTree) -> (RelationTable, RelationTable) {
    let cat = tree.catalog();
    let u = cat.universe();
    let mut s = RelationTable::new(u);
    let mut p = RelationTable::new(u);
    tree.for_each_sequence::<()>(|path| {
        let j = path.len() - 1;
        let (bj, x) = (cat.mask(path[j].problem), path[j].choice);
        for (i, st) in path[..j].iter().enumerate() {
            let y = st.choice;
            if y != x && bj.contains(y) && !s.has_clause(x, y, true) {
                let ev = Evidence::Switch {
                    seq: ObservedSequence::from_steps(path),
                    earlier: i,
                    later: j,
                };
                s.insert(ev.clone());
                p.insert(ev);
            }
        }
        if let Some(d) = tree.default_choice(path[j].problem) {
            if d != x && !p.has_clause(x, d, false) {
                p.insert(Evidence::OverDefault {
                    seq: ObservedSequence::from_steps(path),
                    at: j,
                    default: ObservedSequence::single(path[j].problem, d),
                });
            }
        }
        ControlFlow::Continue(())
    });
    (s, p)
}

pub fn switches(tree: &ChoiceTree) -> RelationTable {
    reveal(tree).0
}

pub fn revealed_p(tree: &ChoiceTree) -> RelationTable {
    reveal(tree).1
}

/// Switches observed along one sequence.
pub fn sequence_switches(oracle: &dyn BehaviorOracle, problems: &[ProblemId]) -> Result<RelationTable, AatError> {
    let cat = oracle.catalog();
    let mut choices = Vec::with_capacity(problems.len());
    for k in 0..problems.len() {
        let c = oracle.choose_at(&problems[..k], problems[k]).ok_or_else(|| {
            AatError::Precondition(format!("no answer in period {} of the sequence", k + 1))
        })?;
        choices.push(c);
    }
    let obs = ObservedSequence {
        problems: problems.to_vec(),
        choices: choices.clone(),
    };
    let mut s = RelationTable::new(cat.universe());
    for j in 0..problems.len() {
        for i in 0..j {
            if choices[i] != choices[j] && cat.mask(problems[j]).contains(choices[i]) {
                s.insert(Evidence::Switch {
                    seq: obs.clone(),
                    earlier: i,
                    later: j,
                });
            }
        }
    }
    Ok(s)
}

/// Orders `set` by `rel` when `rel` is a strict total order on it: every
/// pair decided one way only, transitively. Best first.
fn total_order(rel: &RelationTable, set: AltSet) -> Result<Vec<Alt>, AatError> {
    let u = rel.universe();
    let mut undecided = Vec::new();
    for x in set.iter() {
        for y in set.iter().filter(|&y| y > x) {
            match (rel.contains(x, y), rel.contains(y, x)) {
                (false, false) => undecided.push(format!("{}~{}", u.label(x), u.label(y))),
                (true, true) => {
                    return Err(AatError::Cyclic(format!(
                        "{} and {} are revealed both ways",
                        u.label(x),
                        u.label(y)
                    )))
                }
                _ => {}
            }
        }
    }
    if !undecided.is_empty() {
        return Err(AatError::Undecided(undecided.join(", ")));
    }
    let mut order: Vec<Alt> = set.iter().collect();
    let wins = |a: Alt| set.iter().filter(|&b| rel.contains(a, b)).count();
    order.sort_by_key(|&a| std::cmp::Reverse(wins(a)));
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if !rel.contains(order[i], order[j]) {
                return Err(AatError::Cyclic(format!(
                    "no linear order on {} extends the relation",
                    u.show_set(set)
                )));
            }
        }
    }
    Ok(order)
}

/// The preference order identified on the ever-chosen alternatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preference {
    /// X̂, best first.
    pub order: Vec<Alt>,
    pub ever_chosen: AltSet,
    /// Alternatives never chosen; no claim is made about them.
    pub never_chosen: AltSet,
}

impl Preference {
    /// Full utility with the never-chosen alternatives placed last.
    pub fn utility(&self, universe: &Universe) -> Utility {
        let mut order = self.order.clone();
        order.extend(self.never_chosen.iter());
        Utility::from_ranking(universe, &order).expect("permutation of the universe")
    }

    pub fn to_json(&self, universe: &Universe) -> Value {
        json!({
            "order": self.order.iter().map(|&a| universe.label(a)).collect::<Vec<_>>(),
            "ever_chosen": universe.set_labels(self.ever_chosen),
            "never_chosen": universe.set_labels(self.never_chosen),
        })
    }
}

fn require_aat(tree: &ChoiceTree) -> Result<(), AatError> {
    match axioms::first_violation(tree) {
        Some(r) => Err(AatError::NotAat(Box::new(r))),
        None => Ok(()),
    }
}

/// S as a strict total order on X̂. Checks the three axioms first.
pub fn infer_preference_tree(tree: &ChoiceTree) -> Result<Preference, AatError> {
    require_aat(tree)?;
    let s = switches(tree);
    let ever = if tree.is_complete() {
        tree.default_image()
    } else {
        tree.chosen_anywhere()
    };
    let order = total_order(&s, ever)?;
    Ok(Preference {
        order,
        ever_chosen: ever,
        never_chosen: tree.catalog().universe().all().difference(ever),
    })
}

pub fn infer_preference(oracle: &dyn BehaviorOracle, bound: usize) -> Result<Preference, AatError> {
    infer_preference_tree(&ChoiceTree::explore(oracle, bound)?)
}

/// Bounds on the attention of any representation: {c₀(A)} ⊆ Γ(A) ⊆ Γ⁺(A),
/// indexed by problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttentionBounds {
    catalog: Catalog,
    lower: Vec<AltSet>,
    upper: Vec<AltSet>,
}

impl AttentionBounds {
    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn lower(&self, p: ProblemId) -> AltSet {
        self.lower[p.index()]
    }

    pub fn upper(&self, p: ProblemId) -> AltSet {
        self.upper[p.index()]
    }

    pub fn lowers(&self) -> &[AltSet] {
        &self.lower
    }

    pub fn uppers(&self) -> &[AltSet] {
        &self.upper
    }

    /// Does a per-problem attention table lie inside the envelope?
    pub fn admits(&self, gamma: &[AltSet]) -> bool {
        gamma.len() == self.lower.len()
            && gamma
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(g, (lo, hi))| lo.is_subset(*g) && g.is_subset(*hi))
    }

    /// Γ⁺ as an attention function; frameless catalogs only.
    pub fn upper_attention(&self) -> Result<AttentionFunction, AatError> {
        self.as_attention(&self.upper)
    }

    pub fn lower_attention(&self) -> Result<AttentionFunction, AatError> {
        self.as_attention(&self.lower)
    }

    fn as_attention(&self, table: &[AltSet]) -> Result<AttentionFunction, AatError> {
        if self.catalog.is_framed() {
            return Err(AatError::Precondition("framed bounds are not an attention function".into()));
        }
        let cat = &self.catalog;
        AttentionFunction::from_fn(cat.universe(), cat.has_singletons(), |m: Menu| {
            table[cat.find(m, None).expect("frameless catalog covers menus").index()]
        })
    }

    pub fn to_json(&self) -> Value {
        let u = self.catalog.universe();
        Value::Array(
            self.catalog
                .ids()
                .map(|p| {
                    json!({
                        "menu": crate::io::problem_json(&self.catalog, p),
                        "lower": u.set_labels(self.lower(p)),
                        "upper": u.set_labels(self.upper(p)),
                    })
                })
                .collect(),
        )
    }
}

/// c₀ on every problem, or a precondition error naming an unobserved one.
fn required_default(tree: &ChoiceTree, p: ProblemId) -> Result<Alt, AatError> {
    tree.default_choice(p).ok_or_else(|| {
        AatError::Precondition(format!(
            "behavior on {} is unobserved; this needs its default choice",
            tree.catalog().show(p)
        ))
    })
}

/// Γ⁺(A) = {c₀(A)} ∪ {x ∈ A : c₀(A) S x} ∪ (A \ X̂).
pub fn gamma_plus_tree(tree: &ChoiceTree) -> Result<AttentionBounds, AatError> {
    let pref = infer_preference_tree(tree)?;
    let s = switches(tree);
    let cat = tree.catalog().clone();
    let mut lower = Vec::with_capacity(cat.len());
    let mut upper = Vec::with_capacity(cat.len());
    for p in cat.ids() {
        let a = cat.mask(p);
        let d = required_default(tree, p)?;
        let below = a.iter().filter(|&x| s.contains(d, x)).fold(AltSet::EMPTY, AltSet::with);
        lower.push(AltSet::singleton(d));
        upper.push(below.with(d).union(a.intersection(pref.never_chosen)));
    }
    Ok(AttentionBounds { catalog: cat, lower, upper })
}

pub fn gamma_plus(oracle: &dyn BehaviorOracle, bound: usize) -> Result<AttentionBounds, AatError> {
    gamma_plus_tree(&ChoiceTree::explore(oracle, bound)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceReport {
    pub converged_on: Alt,
    /// (better, worse).
    pub revealed: (Alt, Alt),
}

/// With x = c̃(h)(A) ≠ y = c̃(h)(B) and {x,y} ⊆ A ∩ B, the second-period
/// choices c̃(h,A)(B) and c̃(h,B)(A) agree.
pub fn convergence_test(
    oracle: &dyn BehaviorOracle,
    h: &[ProblemId],
    a: ProblemId,
    b: ProblemId,
) -> Result<ConvergenceReport, AatError> {
    let cat = oracle.catalog();
    let ask = |hist: &[ProblemId], p: ProblemId| {
        oracle
            .choose_at(hist, p)
            .ok_or_else(|| AatError::Precondition("oracle has no answer for the probe".into()))
    };
    let x = ask(h, a)?;
    let y = ask(h, b)?;
    let both = AltSet::singleton(x).with(y);
    let common = cat.mask(a).intersection(cat.mask(b));
    if x == y || !both.is_subset(common) {
        return Err(AatError::Precondition(
            "needs distinct choices from A and B with both available in each".into(),
        ));
    }
    let mut ha = h.to_vec();
    ha.push(a);
    let mut hb = h.to_vec();
    hb.push(b);
    let after_a = ask(&ha, b)?;
    let after_b = ask(&hb, a)?;
    if after_a != after_b || !both.contains(after_a) {
        let u = cat.universe();
        return Err(AatError::Cyclic(format!(
            "second-period choices {} and {} do not converge",
            u.label(after_a),
            u.label(after_b)
        )));
    }
    let worse = if after_a == x { y } else { x };
    Ok(ConvergenceReport {
        converged_on: after_a,
        revealed: (after_a, worse),
    })
}

/// Every binary menu once in canonical order, then all of them again.
pub fn design_probe_sequence(universe: &Universe) -> Vec<Menu> {
    let pairs: Vec<Menu> = universe.menus(false).into_iter().filter(|m| m.len() == 2).collect();
    let mut v = pairs.clone();
    v.extend(pairs);
    v
}

/// The order the probe sequence reveals: S along that one sequence as a
/// strict total order on the alternatives it touches (all but at most one).
pub fn probe_order(oracle: &dyn BehaviorOracle) -> Result<(Vec<ProblemId>, Vec<Alt>), AatError> {
    let cat = oracle.catalog();
    let u = cat.universe();
    let seq: Vec<ProblemId> = design_probe_sequence(u)
        .into_iter()
        .map(|m| {
            cat.find(m, None)
                .ok_or_else(|| AatError::Precondition("probe needs every binary menu unframed".into()))
        })
        .collect::<Result<_, _>>()?;
    let s = sequence_switches(oracle, &seq)?;
    let touched = s.pairs().fold(AltSet::EMPTY, |acc, (x, y)| acc.with(x).with(y));
    let covered = if u.len() == 2 && touched.is_empty() {
        // With two alternatives one may stay unordered.
        AltSet::EMPTY
    } else {
        touched
    };
    if u.all().difference(covered).len() > 1 {
        return Err(AatError::Undecided(format!(
            "the probe orders only {}",
            u.show_set(covered)
        )));
    }
    Ok((seq, total_order(&s, covered)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elicitation {
    /// One menu sequence whose switches order X̂.
    pub sequence: Vec<ProblemId>,
    /// X̂, best first.
    pub order: Vec<Alt>,
}

/// Builds a single sequence that orders X̂: menus whose defaults walk up
/// X̂ from the worst, then every binary menu. Verifies the order by
/// replaying the sequence.
pub fn elicit_preferences(oracle: &dyn BehaviorOracle, bound: usize) -> Result<Elicitation, AatError> {
    let tree = ChoiceTree::explore(oracle, bound)?;
    let pref = infer_preference_tree(&tree)?;
    let cat = tree.catalog();
    let mut sequence = Vec::new();
    for &x in pref.order.iter().rev() {
        let p = cat
            .ids()
            .find(|&p| tree.default_choice(p) == Some(x))
            .expect("x is a default choice");
        sequence.push(p);
    }
    for m in cat.universe().menus(false).into_iter().filter(|m| m.len() == 2) {
        sequence.push(cat.first_for(m.set()).expect("catalog covers binary menus"));
    }
    let s = sequence_switches(oracle, &sequence)?;
    let order = total_order(&s, pref.ever_chosen)?;
    if order != pref.order {
        return Err(AatError::Cyclic("elicited order disagrees with the bounded order".into()));
    }
    Ok(Elicitation { sequence, order })
}

/// Result of the counterfactual-gap diagnostic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterfactualGap {
    /// The strict order rationalizing c₀, best first.
    pub default_order: Vec<Alt>,
    /// Inferred utility order, never-chosen last.
    pub utility_order: Vec<Alt>,
    /// (z, x, y) with z ≻₀ x ≻₀ y and u(x) > u(y) > u(z).
    pub triple: Option<(Alt, Alt, Alt)>,
}

/// The order rationalizing c₀, if one exists.
pub fn default_order(tree: &ChoiceTree) -> Result<Vec<Alt>, AatError> {
    let cat = tree.catalog();
    let u = cat.universe();
    let mut rel = RelationTable::new(u);
    for m in u.menus(false).into_iter().filter(|m| m.len() == 2) {
        let p = cat.first_for(m.set()).expect("binary menu");
        let d = required_default(tree, p)?;
        let other = m.set().without(d).first().unwrap();
        rel.insert(Evidence::OverDefault {
            seq: ObservedSequence::single(p, d),
            at: 0,
            default: ObservedSequence::single(p, other),
        });
    }
    let order = total_order(&rel, u.all())
        .map_err(|_| AatError::Precondition("c₀ on binary menus is not a linear order".into()))?;
    let rank = |a: Alt| order.iter().position(|&b| b == a).unwrap();
    for p in cat.ids() {
        let best = cat.mask(p).iter().min_by_key(|&a| rank(a)).unwrap();
        if tree.default_choice(p) != Some(best) {
            return Err(AatError::Precondition(format!(
                "c₀ is not rationalizable: {} breaks the binary order",
                cat.show(p)
            )));
        }
    }
    Ok(order)
}

pub fn counterfactual_gap_tree(tree: &ChoiceTree) -> Result<CounterfactualGap, AatError> {
    let d = default_order(tree)?;
    let pref = infer_preference_tree(tree)?;
    let util = pref.utility(tree.catalog().universe());
    let n = d.len();
    let mut triple = None;
    'outer: for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (z, x, y) = (d[i], d[j], d[k]);
                if util.prefers(x, y) && util.prefers(y, z) {
                    triple = Some((z, x, y));
                    break 'outer;
                }
            }
        }
    }
    Ok(CounterfactualGap {
        default_order: d,
        utility_order: util.order(),
        triple,
    })
}

pub fn counterfactual_gap(oracle: &dyn BehaviorOracle, bound: usize) -> Result<CounterfactualGap, AatError> {
    counterfactual_gap_tree(&ChoiceTree::explore(oracle, bound)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn labels(u: &Universe, v: &[Alt]) -> Vec<String> {
        v.iter().map(|&a| u.label(a).to_string()).collect()
    }

    #[test]
    fn late_warp_order_and_gap() {
        let model = fixtures::late_warp();
        let u = model.universe().clone();
        let pref = infer_preference(&model, 4).unwrap();
        assert_eq!(labels(&u, &pref.order), ["x", "y", "z"]);
        assert_eq!(u.set_labels(pref.never_chosen), ["z'"]);
        let gap = counterfactual_gap(&model, 4).unwrap();
        assert_eq!(labels(&u, &gap.default_order), ["z", "x", "y", "z'"]);
        let (z, x, y) = gap.triple.unwrap();
        assert_eq!(labels(&u, &[z, x, y]), ["z", "x", "y"]);
    }

    #[test]
    fn worst_first_bounds() {
        let model = fixtures::worst_first();
        let u = model.universe().clone();
        let tree = ChoiceTree::explore(&model, 4).unwrap();
        let s = switches(&tree);
        let (x, y) = (u.alt("x").unwrap(), u.alt("y").unwrap());
        assert!(s.contains(y, x) && !s.contains(x, y));
        let b = gamma_plus_tree(&tree).unwrap();
        let cat = model.catalog();
        let up = |l: &[&str]| u.set_labels(b.upper(cat.find(u.menu(l).unwrap(), None).unwrap()));
        assert_eq!(up(&["x", "y"]), ["x"]);
        assert_eq!(up(&["x", "z"]), ["x", "z"]);
        assert_eq!(up(&["y", "z"]), ["y", "z"]);
        assert!(counterfactual_gap_tree(&tree).unwrap().triple.is_none());
    }

    #[test]
    fn probe_has_binary_menus_twice() {
        let u = Universe::new(["x", "y", "z"]).unwrap();
        let p = design_probe_sequence(&u);
        assert_eq!(p.len(), 6);
        assert_eq!(p[..3], p[3..]);
        let (_, order) = probe_order(&fixtures::worst_first()).unwrap();
        assert!(order.len() >= 2);
    }

    #[test]
    fn opposite_probes_cannot_share_a_sequence() {
        let (m1, m2) = fixtures::opposite_probes();
        let u = m1.universe().clone();
        let (x, y) = (u.alt("x").unwrap(), u.alt("y").unwrap());
        let t1 = ChoiceTree::explore(&m1, 4).unwrap();
        let t2 = ChoiceTree::explore(&m2, 4).unwrap();
        let reveals = |t: &ChoiceTree, path: &[crate::tree::Step]| {
            let cat = t.catalog();
            let ch = t.run(&path.iter().map(|s| s.problem).collect::<Vec<_>>()).unwrap();
            (1..ch.len()).any(|j| ch[j] == x && (0..j).any(|i| ch[i] == y) && cat.mask(path[j].problem).contains(y))
        };
        let mut both = 0;
        let mut each = (0, 0);
        t1.for_each_sequence::<()>(|path| {
            let (a, b) = (reveals(&t1, path), reveals(&t2, path));
            each.0 += a as usize;
            each.1 += b as usize;
            both += (a && b) as usize;
            ControlFlow::Continue(())
        });
        assert!(each.0 > 0 && each.1 > 0);
        assert_eq!(both, 0);
    }
}
