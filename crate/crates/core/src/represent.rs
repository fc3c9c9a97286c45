//! Builds (u, Γ) from behavior, or explains why none exists.
//!
//! Pairs of ever-chosen alternatives are ordered by probing a binary menu
//! right after a menu whose default is the non-default member; the resulting
//! total order plus Γ(A) = {c₀(A)} is then checked against the tree.

use std::ops::ControlFlow;

use serde_json::{json, Value};

use crate::axioms;
use crate::catalog::{Catalog, ProblemId};
use crate::error::AatError;
use crate::frames::AatfModel;
use crate::model::{AatModel, AttentionFunction, Utility};
use crate::oracle::BehaviorOracle;
use crate::tree::ChoiceTree;
use crate::universe::{Alt, AltSet, Universe};
use crate::verdict::{Law, VerdictReport};
use crate::witness::{ObservedSequence, Witness};

/// The pieces of the constructed order. Pairs are (better, worse).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructedOrder {
    /// d ≻ w because d is still chosen from {d,w} after w was chosen.
    pub succ_s: Vec<(Alt, Alt)>,
    /// w ≻ d because w, once chosen, displaces the default d of {d,w}.
    pub succ_d: Vec<(Alt, Alt)>,
    /// Ever-chosen above never-chosen.
    pub succ_p: Vec<(Alt, Alt)>,
    /// Best first.
    pub total: Vec<Alt>,
}

impl ConstructedOrder {
    pub fn to_json(&self, u: &Universe) -> Value {
        let pairs = |v: &[(Alt, Alt)]| -> Value {
            v.iter().map(|&(a, b)| json!([u.label(a), u.label(b)])).collect()
        };
        json!({
            "switch": pairs(&self.succ_s),
            "displacement": pairs(&self.succ_d),
            "never_chosen": pairs(&self.succ_p),
            "total": self.total.iter().map(|&a| u.label(a)).collect::<Vec<_>>(),
        })
    }
}

/// A successful construction.
#[derive(Clone, Debug)]
pub struct Constructed<M> {
    pub model: M,
    pub order: ConstructedOrder,
    /// Alternatives never chosen, placed at the bottom without evidence.
    pub unranked: AltSet,
    pub verification: VerdictReport,
}

struct Core {
    utility: Utility,
    gamma: Vec<AltSet>,
    order: ConstructedOrder,
    unranked: AltSet,
}

fn missing(cat: &Catalog, what: &str) -> AatError {
    AatError::Precondition(format!(
        "behavior on {} is unobserved; construction needs it ({what})",
        cat.universe().show_set(cat.universe().all())
    ))
}

/// Stage 1 and the utility/attention assignment. A conflict between probes
/// with the same chosen set comes back as a witness.
fn build_core(tree: &ChoiceTree) -> Result<Result<Core, Witness>, AatError> {
    if tree.horizon() < 2 {
        return Err(AatError::Precondition("construction needs horizon at least 2".into()));
    }
    let cat = tree.catalog();
    let u = cat.universe();
    let mut c0 = Vec::with_capacity(cat.len());
    for p in cat.ids() {
        c0.push(tree.default_choice(p).ok_or_else(|| missing(cat, "a default choice"))?);
    }
    let ever = c0.iter().fold(AltSet::EMPTY, |s, &a| s.with(a));
    let mut succ_s = Vec::new();
    let mut succ_d = Vec::new();
    let xs: Vec<Alt> = ever.iter().collect();
    for (i, &x) in xs.iter().enumerate() {
        for &y in &xs[i + 1..] {
            let pair = AltSet::singleton(x).with(y);
            let b = cat.first_for(pair).ok_or_else(|| missing(cat, "a binary menu"))?;
            let d = c0[b.index()];
            let w = if d == x { y } else { x };
            let mut decided: Option<(ProblemId, Alt)> = None;
            for a in cat.ids().filter(|&a| c0[a.index()] == w) {
                let c = tree
                    .choose(&[a], b)
                    .ok_or_else(|| missing(cat, "a two-period probe"))?;
                match decided {
                    None => decided = Some((a, c)),
                    Some((a0, c_first)) if c_first != c => {
                        return Ok(Err(Witness::HistoryEquivalence {
                            first: ObservedSequence {
                                problems: vec![a0, b],
                                choices: vec![w, c_first],
                            },
                            second: ObservedSequence {
                                problems: vec![a, b],
                                choices: vec![w, c],
                            },
                        }))
                    }
                    _ => {}
                }
            }
            let (_, c) = decided.expect("w is a default choice");
            if c == d {
                succ_s.push((d, w));
            } else {
                succ_d.push((w, d));
            }
        }
    }
    let unranked = u.all().difference(ever);
    let succ_p: Vec<(Alt, Alt)> = ever
        .iter()
        .flat_map(|x| unranked.iter().map(move |z| (x, z)))
        .collect();
    let beats = |a: Alt, b: Alt| succ_s.contains(&(a, b)) || succ_d.contains(&(a, b));
    let mut total = xs.clone();
    total.sort_by_key(|&a| std::cmp::Reverse(xs.iter().filter(|&&b| beats(a, b)).count()));
    total.extend(unranked.iter());
    let utility = Utility::from_ranking(u, &total).expect("permutation");
    let gamma = c0.iter().map(|&a| AltSet::singleton(a)).collect();
    Ok(Ok(Core {
        utility,
        gamma,
        order: ConstructedOrder {
            succ_s,
            succ_d,
            succ_p,
            total,
        },
        unranked,
    }))
}

/// The first answered sequence where `model` disagrees with the tree.
pub fn mismatch(tree: &ChoiceTree, model: &dyn BehaviorOracle) -> Option<Witness> {
    let e = model.engine();
    tree.for_each_sequence(|path| {
        let k = path.len() - 1;
        let expected = match e {
            Some(e) => {
                let (_, chosen) = e.run(&path[..k].iter().map(|s| s.problem).collect::<Vec<_>>());
                e.step(chosen, path[k].problem)
            }
            None => {
                let h: Vec<ProblemId> = path[..k].iter().map(|s| s.problem).collect();
                match model.choose_at(&h, path[k].problem) {
                    Some(c) => c,
                    None => return ControlFlow::Continue(()),
                }
            }
        };
        if expected != path[k].choice {
            ControlFlow::Break(Witness::Mismatch {
                seq: ObservedSequence::from_steps(path),
                expected,
            })
        } else {
            ControlFlow::Continue(())
        }
    })
}

/// Faster comparison for engine-backed models: walks the tree with the
/// chosen set only.
fn mismatch_engine(tree: &ChoiceTree, e: &crate::model::Engine) -> Option<Witness> {
    let mut chosen: Vec<AltSet> = vec![AltSet::EMPTY];
    tree.for_each_sequence(|path| {
        let k = path.len() - 1;
        chosen.truncate(k + 1);
        let expected = e.step(chosen[k], path[k].problem);
        if expected != path[k].choice {
            return ControlFlow::Break(Witness::Mismatch {
                seq: ObservedSequence::from_steps(path),
                expected,
            });
        }
        chosen.push(chosen[k].with(expected));
        ControlFlow::Continue(())
    })
}

fn compare(tree: &ChoiceTree, model: &dyn BehaviorOracle) -> Option<Witness> {
    match model.engine() {
        Some(e) => mismatch_engine(tree, e),
        None => mismatch(tree, model),
    }
}

/// Does `model` reproduce every answered choice of the tree?
pub fn verify_tree(model: &dyn BehaviorOracle, tree: &ChoiceTree) -> Result<VerdictReport, AatError> {
    if model.catalog() != tree.catalog() {
        return Err(AatError::Precondition(
            "model and behavior are defined on different choice problems".into(),
        ));
    }
    Ok(VerdictReport::decide(Law::Representation, tree, compare(tree, model)))
}

pub fn verify_representation(
    model: &dyn BehaviorOracle,
    oracle: &dyn BehaviorOracle,
    bound: usize,
) -> Result<VerdictReport, AatError> {
    verify_tree(model, &ChoiceTree::explore(oracle, bound)?)
}

/// Prefers an axiom witness; otherwise the fallback.
fn failure(tree: &ChoiceTree, fallback: VerdictReport) -> AatError {
    AatError::NotAat(Box::new(axioms::first_violation(tree).unwrap_or(fallback)))
}

fn construct_with<M: BehaviorOracle>(
    tree: &ChoiceTree,
    make: impl FnOnce(&Core) -> M,
) -> Result<Constructed<M>, AatError> {
    let core = match build_core(tree)? {
        Ok(core) => core,
        Err(w) => {
            return Err(failure(tree, VerdictReport::decide(Law::Condition(8), tree, Some(w))));
        }
    };
    let model = make(&core);
    let verification = VerdictReport::decide(Law::Representation, tree, compare(tree, &model));
    if verification.violated() {
        return Err(failure(tree, verification));
    }
    Ok(Constructed {
        model,
        order: core.order,
        unranked: core.unranked,
        verification,
    })
}

pub fn construct_tree(tree: &ChoiceTree) -> Result<Constructed<AatModel>, AatError> {
    let cat = tree.catalog().clone();
    if cat.is_framed() {
        return Err(AatError::Precondition("framed behavior needs the framed constructor".into()));
    }
    construct_with(tree, |core| {
        let g = AttentionFunction::from_fn(cat.universe(), cat.has_singletons(), |m| {
            core.gamma[cat.find(m, None).expect("frameless catalog").index()]
        })
        .expect("defaults lie in their menus");
        AatModel::new(core.utility.clone(), g)
    })
}

pub fn construct_representation(
    oracle: &dyn BehaviorOracle,
    bound: usize,
) -> Result<Constructed<AatModel>, AatError> {
    construct_tree(&ChoiceTree::explore(oracle, bound)?)
}

pub fn construct_framed_tree(tree: &ChoiceTree) -> Result<Constructed<AatfModel>, AatError> {
    let cat = tree.catalog().clone();
    construct_with(tree, |core| {
        AatfModel::new(core.utility.clone(), cat.clone(), core.gamma.clone()).expect("defaults lie in their menus")
    })
}

pub fn construct_representation_framed(
    oracle: &dyn BehaviorOracle,
    bound: usize,
) -> Result<Constructed<AatfModel>, AatError> {
    construct_framed_tree(&ChoiceTree::explore(oracle, bound)?)
}
