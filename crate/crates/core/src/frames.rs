//! Choice problems with frames: the framed engine, frame axioms, the list
//! and recommendation constructions, and frame-effect analysis.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use serde_json::{json, Value};

use crate::axioms;
use crate::catalog::{Catalog, Frame, Problem, ProblemId};
use crate::error::AatError;
use crate::identify::switches;
use crate::model::{Engine, Utility};
use crate::oracle::BehaviorOracle;
use crate::represent::{self, Constructed};
use crate::tree::ChoiceTree;
use crate::universe::{Alt, AltSet, Universe};
use crate::verdict::{Law, VerdictReport};
use crate::witness::{ObservedSequence, Witness};

/// Utility plus default attention per framed problem.
#[derive(Clone, Debug)]
pub struct AatfModel {
    utility: Utility,
    catalog: Catalog,
    gamma: Vec<AltSet>,
    engine: Engine,
}

impl AatfModel {
    pub fn new(utility: Utility, catalog: Catalog, gamma: Vec<AltSet>) -> Result<AatfModel, AatError> {
        if gamma.len() != catalog.len() {
            return Err(AatError::InvalidAttention(format!(
                "{} consideration sets for {} problems",
                gamma.len(),
                catalog.len()
            )));
        }
        for p in catalog.ids() {
            let g = gamma[p.index()];
            if g.is_empty() || !g.is_subset(catalog.mask(p)) {
                return Err(AatError::InvalidAttention(format!(
                    "consideration {} is not a nonempty subset of {}",
                    catalog.universe().show_set(g),
                    catalog.show(p)
                )));
            }
        }
        let engine = Engine::new(&catalog, gamma.clone(), &utility);
        Ok(AatfModel {
            utility,
            catalog,
            gamma,
            engine,
        })
    }

    pub fn from_fn(
        utility: Utility,
        catalog: Catalog,
        mut f: impl FnMut(&Problem) -> AltSet,
    ) -> Result<AatfModel, AatError> {
        let gamma = catalog.problems().iter().map(&mut f).collect();
        AatfModel::new(utility, catalog, gamma)
    }

    pub fn universe(&self) -> &Universe {
        self.catalog.universe()
    }

    pub fn utility(&self) -> &Utility {
        &self.utility
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn gamma(&self, p: ProblemId) -> AltSet {
        self.gamma[p.index()]
    }

    pub fn gammas(&self) -> &[AltSet] {
        &self.gamma
    }

    pub fn with_gamma(&self, gamma: Vec<AltSet>) -> Result<AatfModel, AatError> {
        AatfModel::new(self.utility.clone(), self.catalog.clone(), gamma)
    }

    pub fn chosen_set(&self, h: &[ProblemId]) -> AltSet {
        self.engine.run(h).1
    }

    /// Γ(A,F) ∪ (c(h) ∩ A).
    pub fn consideration(&self, h: &[ProblemId], p: ProblemId) -> AltSet {
        self.engine.consider(self.chosen_set(h), p)
    }

    pub fn choose_framed(&self, h: &[ProblemId], p: ProblemId) -> Alt {
        self.engine.step(self.chosen_set(h), p)
    }

    pub fn run_framed_sequence(&self, problems: &[ProblemId]) -> Vec<Alt> {
        self.engine.run(problems).0
    }

    /// Looks up a framed problem by menu labels and frame.
    pub fn problem(&self, menu: &[&str], frame: &Frame) -> Result<ProblemId, AatError> {
        let m = self.universe().menu(menu)?;
        self.catalog.find(m, Some(frame)).ok_or_else(|| {
            AatError::InvalidMenu(format!(
                "no problem {}[{}]",
                self.universe().show_set(m.set()),
                frame.describe(self.universe())
            ))
        })
    }

    pub fn to_json(&self) -> Value {
        crate::io::framed_model_json(self)
    }
}

impl BehaviorOracle for AatfModel {
    fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    fn choose_at(&self, history: &[ProblemId], problem: ProblemId) -> Option<Alt> {
        Some(self.choose_framed(history, problem))
    }

    fn engine(&self) -> Option<&Engine> {
        Some(&self.engine)
    }
}

/// Weak Stability, Past Dependence and Default Attention over framed
/// problems.
pub fn check_frame_axioms(oracle: &dyn BehaviorOracle, bound: usize) -> Result<[VerdictReport; 3], AatError> {
    Ok(axioms::check_axioms(&ChoiceTree::explore(oracle, bound)?))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    List,
    Rec,
}

fn require_kind(cat: &Catalog, kind: Kind) -> Result<(), AatError> {
    for p in cat.ids() {
        let ok = matches!(
            (&cat.problem(p).frame, kind),
            (Some(Frame::List(_)), Kind::List) | (Some(Frame::Rec(_)), Kind::Rec)
        );
        if !ok {
            return Err(AatError::InvalidFrame(format!(
                "{} is not framed as a {}",
                cat.show(p),
                if kind == Kind::List { "list" } else { "recommendation" }
            )));
        }
    }
    Ok(())
}

/// Alternatives the frame singles out relative to the default x.
fn highlighted(frame: &Frame, mask: AltSet, x: Alt) -> AltSet {
    match frame {
        Frame::List(_) => mask.iter().filter(|&y| frame.listed_above(y, x)).fold(AltSet::EMPTY, AltSet::with),
        Frame::Rec(s) => s.without(x),
        Frame::Generic(_) => AltSet::EMPTY,
    }
}

fn frame_axiom(tree: &ChoiceTree, kind: Kind) -> Result<VerdictReport, AatError> {
    let cat = tree.catalog();
    require_kind(cat, kind)?;
    let s = switches(tree);
    let mut witness = None;
    'outer: for p in cat.ids() {
        let Some(x) = tree.default_choice(p) else { continue };
        let frame = cat.problem(p).frame.as_ref().expect("framed");
        for y in highlighted(frame, cat.mask(p), x).iter() {
            if let Some(ev) = s.first(y, x) {
                witness = Some(Witness::FrameAxiom {
                    default: ObservedSequence::single(p, x),
                    evidence: ev.clone(),
                });
                break 'outer;
            }
        }
    }
    let law = if kind == Kind::List { Law::ListFrame } else { Law::RecFrame };
    Ok(VerdictReport::decide(law, tree, witness))
}

/// No switch to an alternative listed above a default choice.
pub fn list_axiom(tree: &ChoiceTree) -> Result<VerdictReport, AatError> {
    frame_axiom(tree, Kind::List)
}

/// No switch to a recommended alternative over a default choice.
pub fn rec_axiom(tree: &ChoiceTree) -> Result<VerdictReport, AatError> {
    frame_axiom(tree, Kind::Rec)
}

pub fn check_axiom_list(oracle: &dyn BehaviorOracle, bound: usize) -> Result<VerdictReport, AatError> {
    list_axiom(&ChoiceTree::explore(oracle, bound)?)
}

pub fn check_axiom_rec(oracle: &dyn BehaviorOracle, bound: usize) -> Result<VerdictReport, AatError> {
    rec_axiom(&ChoiceTree::explore(oracle, bound)?)
}

fn build_structured(tree: &ChoiceTree, kind: Kind) -> Result<Constructed<AatfModel>, AatError> {
    let report = frame_axiom(tree, kind)?;
    if report.violated() {
        return Err(AatError::NotAat(Box::new(report)));
    }
    let base = represent::construct_framed_tree(tree)?;
    let cat = tree.catalog();
    let gamma: Vec<AltSet> = cat
        .ids()
        .map(|p| {
            let x = tree.default_choice(p).expect("complete tree");
            let frame = cat.problem(p).frame.as_ref().expect("framed");
            highlighted(frame, cat.mask(p), x).with(x)
        })
        .collect();
    let model = base.model.with_gamma(gamma)?;
    let verification = represent::verify_tree(&model, tree)?;
    if verification.violated() {
        return Err(AatError::NotAat(Box::new(verification)));
    }
    Ok(Constructed {
        model,
        order: base.order,
        unranked: base.unranked,
        verification,
    })
}

/// Γ(A,F) = {c₀} ∪ {y listed above c₀}, verified against the behavior.
pub fn build_list_attention(oracle: &dyn BehaviorOracle, bound: usize) -> Result<Constructed<AatfModel>, AatError> {
    build_structured(&ChoiceTree::explore(oracle, bound)?, Kind::List)
}

/// Γ(A,F) = {c₀} ∪ F, verified against the behavior.
pub fn build_rec_attention(oracle: &dyn BehaviorOracle, bound: usize) -> Result<Constructed<AatfModel>, AatError> {
    build_structured(&ChoiceTree::explore(oracle, bound)?, Kind::Rec)
}

/// Is every consideration set an upper segment of its list?
pub fn is_list_structured(model: &AatfModel) -> bool {
    let cat = model.catalog();
    cat.ids().all(|p| match &cat.problem(p).frame {
        Some(f @ Frame::List(_)) => {
            let g = model.gamma(p);
            g.iter().all(|x| cat.mask(p).iter().all(|y| !f.listed_above(y, x) || g.contains(y)))
        }
        _ => false,
    })
}

/// Does every consideration set contain its recommendations?
pub fn is_rec_structured(model: &AatfModel) -> bool {
    let cat = model.catalog();
    cat.ids().all(|p| match &cat.problem(p).frame {
        Some(Frame::Rec(s)) => s.is_subset(model.gamma(p)),
        _ => false,
    })
}

/// What a frame achieved for a target alternative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameEffect {
    pub chosen: Alt,
    pub success: bool,
    /// The target is considered in every later problem containing it, for
    /// every continuation within the bound.
    pub lasting: bool,
    /// For an unsuccessful frame: presenting it again right away gives the
    /// same choice.
    pub repeat_futile: Option<bool>,
}

impl FrameEffect {
    pub fn to_json(&self, u: &Universe) -> Value {
        json!({
            "chosen": u.label(self.chosen),
            "success": self.success,
            "lasting": self.lasting,
            "repeat_futile": self.repeat_futile,
        })
    }
}

pub fn frame_effect_report(
    model: &AatfModel,
    h: &[ProblemId],
    p: ProblemId,
    target: Alt,
    bound: usize,
) -> Result<FrameEffect, AatError> {
    let cat = model.catalog();
    if !cat.mask(p).contains(target) {
        return Err(AatError::Precondition(format!(
            "target `{}` is not in {}",
            model.universe().label(target),
            cat.show(p)
        )));
    }
    let e = &model.engine;
    let before = model.chosen_set(h);
    let chosen = e.step(before, p);
    let after = before.with(chosen);
    let mut seen = BTreeSet::new();
    let mut frontier = vec![after];
    seen.insert(after);
    let mut lasting = true;
    for depth in 0..bound {
        let mut next = Vec::new();
        for &state in &frontier {
            for q in cat.ids() {
                if cat.mask(q).contains(target) && !e.consider(state, q).contains(target) {
                    lasting = false;
                }
                let s2 = state.with(e.step(state, q));
                if depth + 1 < bound && seen.insert(s2) {
                    next.push(s2);
                }
            }
        }
        frontier = next;
    }
    let success = chosen == target;
    let repeat_futile = (!success).then(|| e.step(after, p) == chosen);
    Ok(FrameEffect {
        chosen,
        success,
        lasting,
        repeat_futile,
    })
}

/// For generic frames: one Γ⁺-style envelope per framed problem.
pub fn framed_bounds(oracle: &dyn BehaviorOracle, bound: usize) -> Result<crate::identify::AttentionBounds, AatError> {
    crate::identify::gamma_plus(oracle, bound)
}

/// Every framed sequence where `a` and `b` disagree, up to `limit`.
pub fn disagreements(a: &AatfModel, b: &AatfModel, bound: usize, limit: usize) -> Result<Vec<ObservedSequence>, AatError> {
    let tree = ChoiceTree::explore(a, bound)?;
    let mut out = Vec::new();
    tree.for_each_sequence::<()>(|path| {
        let k = path.len() - 1;
        let h: Vec<ProblemId> = path[..k].iter().map(|s| s.problem).collect();
        if b.choose_framed(&h, path[k].problem) != path[k].choice {
            out.push(ObservedSequence::from_steps(path));
            if out.len() >= limit {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn successful_frame_lasts() {
        let f = fixtures::alert_frame(true);
        let r = frame_effect_report(&f.model, &[], f.alert, f.target, 3).unwrap();
        assert!(r.success && r.lasting);
        assert_eq!(r.repeat_futile, None);
    }

    #[test]
    fn unsuccessful_frame_is_futile() {
        let f = fixtures::alert_frame(false);
        let r = frame_effect_report(&f.model, &[], f.alert, f.target, 3).unwrap();
        assert_eq!((r.success, r.lasting, r.repeat_futile), (false, false, Some(true)));
    }

    #[test]
    fn list_construction_is_upward_closed() {
        let m = fixtures::diapers();
        let c = build_list_attention(&m, 3).unwrap();
        assert!(is_list_structured(&c.model));
        assert!(c.verification.passed());
    }

    #[test]
    fn disregarded_recommendation_breaks_the_axiom() {
        let m = fixtures::unsought_advice();
        let r = check_axiom_rec(&m, 3).unwrap();
        assert!(r.violated());
        assert!(r.replays(&m));
        assert!(build_rec_attention(&m, 3).is_err());
    }

    #[test]
    fn wrong_frame_kind_is_a_domain_error() {
        let m = fixtures::diapers();
        assert!(matches!(check_axiom_rec(&m, 2), Err(AatError::InvalidFrame(_))));
    }
}
