//! Attention structures: attention filters, shortlists and coarse-max
//! attention. Recognizers, rationale-based builders, their evolution under
//! lasting consideration, and representability search.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::error::AatError;
use crate::identify::{self, AttentionBounds};
use crate::model::{AatModel, AttentionFunction};
use crate::oracle::BehaviorOracle;
use crate::represent;
use crate::tree::ChoiceTree;
use crate::universe::{Alt, AltSet, Menu, Universe};
use crate::verdict::{Law, VerdictReport};
use crate::witness::{ObservedSequence, Witness};

/// An asymmetric relation on alternatives; `(x, y)` means x dominates y.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rationale {
    universe: Universe,
    edges: BTreeSet<(Alt, Alt)>,
}

impl Rationale {
    pub fn new(universe: &Universe, edges: impl IntoIterator<Item = (Alt, Alt)>) -> Result<Rationale, AatError> {
        let edges: BTreeSet<(Alt, Alt)> = edges.into_iter().collect();
        for &(x, y) in &edges {
            if x.index() >= universe.len() || y.index() >= universe.len() {
                return Err(AatError::InvalidRationale("edge outside the universe".into()));
            }
            if x == y || edges.contains(&(y, x)) {
                return Err(AatError::InvalidRationale(format!(
                    "{} and {} dominate each other",
                    universe.label(x),
                    universe.label(y)
                )));
            }
        }
        Ok(Rationale {
            universe: universe.clone(),
            edges,
        })
    }

    pub fn from_labels(universe: &Universe, edges: &[(&str, &str)]) -> Result<Rationale, AatError> {
        let e = edges
            .iter()
            .map(|(a, b)| Ok((universe.alt(a)?, universe.alt(b)?)))
            .collect::<Result<Vec<_>, AatError>>()?;
        Rationale::new(universe, e)
    }

    pub fn empty(universe: &Universe) -> Rationale {
        Rationale {
            universe: universe.clone(),
            edges: BTreeSet::new(),
        }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn edges(&self) -> impl Iterator<Item = (Alt, Alt)> + '_ {
        self.edges.iter().copied()
    }

    pub fn dominates(&self, x: Alt, y: Alt) -> bool {
        self.edges.contains(&(x, y))
    }

    /// Elements of `a` no member of `a` dominates.
    pub fn undominated(&self, a: AltSet) -> AltSet {
        a.iter()
            .filter(|&y| !a.iter().any(|x| self.dominates(x, y)))
            .fold(AltSet::EMPTY, AltSet::with)
    }

    pub fn to_json(&self) -> Value {
        let u = &self.universe;
        json!({
            "alternatives": u.labels(),
            "edges": self.edges.iter().map(|&(x, y)| json!([u.label(x), u.label(y)])).collect::<Vec<_>>(),
        })
    }
}

/// Γ(A) = undominated members of A.
pub fn shortlist_from_rationale(r: &Rationale) -> Result<AttentionFunction, AatError> {
    let u = r.universe();
    if let Some(m) = u.menus(false).into_iter().find(|m| r.undominated(m.set()).is_empty()) {
        return Err(AatError::InvalidRationale(format!(
            "every member of {} is dominated",
            u.show_set(m.set())
        )));
    }
    AttentionFunction::from_fn(u, false, |m| r.undominated(m.set()))
}

/// Drops x→y once y has been chosen.
pub fn revise_rationale(r: &Rationale, chosen: AltSet) -> Rationale {
    Rationale {
        universe: r.universe.clone(),
        edges: r.edges.iter().copied().filter(|&(_, y)| !chosen.contains(y)).collect(),
    }
}

/// An asymmetric relation on nonempty sets; `(D, E)` means category D
/// shades category E when both are fully available.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetRationale {
    universe: Universe,
    edges: Vec<(AltSet, AltSet)>,
}

impl SetRationale {
    pub fn new(universe: &Universe, edges: Vec<(AltSet, AltSet)>) -> Result<SetRationale, AatError> {
        let mut edges = edges;
        edges.sort();
        edges.dedup();
        for &(d, e) in &edges {
            if d.is_empty() || e.is_empty() || !d.union(e).is_subset(universe.all()) {
                return Err(AatError::InvalidRationale(
                    "categories must be nonempty sets of the universe".into(),
                ));
            }
            if edges.binary_search(&(e, d)).is_ok() {
                return Err(AatError::InvalidRationale(format!(
                    "{} and {} shade each other",
                    universe.show_set(d),
                    universe.show_set(e)
                )));
            }
        }
        Ok(SetRationale {
            universe: universe.clone(),
            edges,
        })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn edges(&self) -> &[(AltSet, AltSet)] {
        &self.edges
    }

    /// Members of `a` in no shaded category within `a`.
    pub fn coarse_max(&self, a: AltSet) -> AltSet {
        let shaded = self
            .edges
            .iter()
            .filter(|(d, e)| d.union(*e).is_subset(a))
            .fold(AltSet::EMPTY, |s, (_, e)| s.union(*e));
        a.difference(shaded)
    }

    pub fn to_json(&self) -> Value {
        let u = &self.universe;
        json!({
            "alternatives": u.labels(),
            "edges": self.edges.iter().map(|&(d, e)| json!([u.set_labels(d), u.set_labels(e)])).collect::<Vec<_>>(),
        })
    }
}

pub fn coarse_max_from_rationale(sr: &SetRationale) -> Result<AttentionFunction, AatError> {
    let u = sr.universe();
    if let Some(m) = u.menus(false).into_iter().find(|m| sr.coarse_max(m.set()).is_empty()) {
        return Err(AatError::InvalidRationale(format!(
            "every member of {} is shaded",
            u.show_set(m.set())
        )));
    }
    AttentionFunction::from_fn(u, false, |m| sr.coarse_max(m.set()))
}

/// D ≻ E becomes (D ∪ (E ∩ c)) ≻ (E \ c): chosen members leave the shaded
/// category but still have to be present for the edge to apply. Edges whose
/// shaded part empties are dropped.
pub fn revise_set_rationale(sr: &SetRationale, chosen: AltSet) -> SetRationale {
    let edges = sr
        .edges
        .iter()
        .filter(|(_, e)| !e.difference(chosen).is_empty())
        .map(|&(d, e)| (d.union(e.intersection(chosen)), e.difference(chosen)))
        .collect();
    SetRationale::new(&sr.universe, edges).expect("revision keeps categories asymmetric")
}

/// The rule D ≻ E becomes D ≻ (E \ c), without keeping E ∩ c as a
/// condition. Kept for comparison; it can shade too much.
pub fn revise_set_rationale_naive(sr: &SetRationale, chosen: AltSet) -> Vec<(AltSet, AltSet)> {
    sr.edges
        .iter()
        .filter(|(_, e)| !e.difference(chosen).is_empty())
        .map(|&(d, e)| (d, e.difference(chosen)))
        .collect()
}

/// A ↦ Γ(A) ∪ (c(h) ∩ A).
pub fn evolved_attention(model: &AatModel, h: &[Menu]) -> Result<AttentionFunction, AatError> {
    let chosen = model.chosen_set(h)?;
    evolve(model.gamma(), chosen)
}

pub fn evolve(gamma: &AttentionFunction, chosen: AltSet) -> Result<AttentionFunction, AatError> {
    AttentionFunction::from_fn(gamma.universe(), gamma.has_singletons(), |m| {
        gamma.get(m).union(chosen.intersection(m.set()))
    })
}

/// A menu and an unconsidered member whose removal changes consideration.
pub fn attention_filter_violation(g: &AttentionFunction) -> Option<(Menu, Alt)> {
    let u = g.universe();
    for m in g.menus() {
        let gm = g.get(m);
        for y in m.set().difference(gm).iter() {
            let rest = m.set().without(y);
            if let Ok(r) = u.menu_from_set(rest, g.has_singletons()) {
                if g.get(r) != gm {
                    return Some((m, y));
                }
            }
        }
    }
    None
}

pub fn is_attention_filter(g: &AttentionFunction) -> bool {
    attention_filter_violation(g).is_none()
}

/// The rationale read off binary menus, if Γ is its shortlist.
pub fn shortlist_rationale(g: &AttentionFunction) -> Option<Rationale> {
    let u = g.universe();
    let mut edges = Vec::new();
    for m in u.menus(false).into_iter().filter(|m| m.len() == 2) {
        let gm = g.get(m);
        if gm.len() == 1 {
            let x = gm.first().unwrap();
            edges.push((x, m.set().without(x).first().unwrap()));
        }
    }
    let r = Rationale::new(u, edges).ok()?;
    u.menus(false)
        .into_iter()
        .all(|m| r.undominated(m.set()) == g.get(m))
        .then_some(r)
}

pub fn is_shortlist(g: &AttentionFunction) -> bool {
    shortlist_rationale(g).is_some()
}

/// Γ is coarse-max iff Γ(B) ∩ A ⊆ Γ(A) whenever A ⊆ B. The certificate has
/// one edge Γ(A) ≻ A \ Γ(A) per menu that excludes something.
pub fn coarse_max_rationale(g: &AttentionFunction) -> Option<SetRationale> {
    let u = g.universe();
    let menus = u.menus(false);
    for &b in &menus {
        for &a in &menus {
            if a.set().is_subset(b.set()) && !g.get(b).intersection(a.set()).is_subset(g.get(a)) {
                return None;
            }
        }
    }
    let edges = menus
        .iter()
        .filter(|m| g.get(**m) != m.set())
        .map(|&m| (g.get(m), m.set().difference(g.get(m))))
        .collect();
    let sr = SetRationale::new(u, edges).ok()?;
    debug_assert!(menus.iter().all(|&m| sr.coarse_max(m.set()) == g.get(m)));
    Some(sr)
}

pub fn is_coarse_max(g: &AttentionFunction) -> bool {
    coarse_max_rationale(g).is_some()
}

/// If c₀(T) = x and c₀(T \ {y}) ≠ x, then not y S x.
pub fn axiom_cla(tree: &ChoiceTree) -> VerdictReport {
    let cat = tree.catalog();
    let s = identify::switches(tree);
    let mut witness = None;
    'outer: for t in cat.ids() {
        let Some(x) = tree.default_choice(t) else { continue };
        for y in cat.mask(t).without(x).iter() {
            let Some(r) = cat.first_for(cat.mask(t).without(y)) else { continue };
            if cat.is_framed() && cat.problem(r).frame != cat.problem(t).frame {
                continue;
            }
            let Some(cr) = tree.default_choice(r) else { continue };
            if cr == x {
                continue;
            }
            if let Some(ev) = s.first(y, x) {
                witness = Some(Witness::Cla {
                    full: ObservedSequence::single(t, x),
                    reduced: ObservedSequence::single(r, cr),
                    evidence: ev.clone(),
                });
                break 'outer;
            }
        }
    }
    VerdictReport::decide(Law::LimitedAttention, tree, witness)
}

pub fn check_axiom_cla(oracle: &dyn BehaviorOracle, bound: usize) -> Result<VerdictReport, AatError> {
    Ok(axiom_cla(&ChoiceTree::explore(oracle, bound)?))
}

/// Largest universe the representability searches accept.
pub const MAX_SEARCH_ALTERNATIVES: usize = 5;

/// Node budget for the attention-filter search.
pub const FILTER_SEARCH_BUDGET: usize = 2_000_000;

/// Utility and envelope of an AAT oracle, or `None` when the behavior has no
/// AAT representation at this bound.
fn envelope(tree: &ChoiceTree) -> Result<Option<(AatModel, AttentionBounds)>, AatError> {
    let cat = tree.catalog();
    if cat.is_framed() || cat.has_singletons() {
        return Err(AatError::Precondition("structures are defined on plain menus".into()));
    }
    if cat.universe().len() > MAX_SEARCH_ALTERNATIVES {
        return Err(AatError::LimitExceeded(format!(
            "structure search supports at most {MAX_SEARCH_ALTERNATIVES} alternatives"
        )));
    }
    let pref = match identify::infer_preference_tree(tree) {
        Ok(p) => p,
        Err(AatError::NotAat(_)) | Err(AatError::Cyclic(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let bounds = identify::gamma_plus_tree(tree)?;
    let model = AatModel::new(pref.utility(cat.universe()), bounds.upper_attention()?);
    if represent::verify_tree(&model, tree)?.violated() {
        return Ok(None);
    }
    Ok(Some((model, bounds)))
}

fn table_to_attention(u: &Universe, table: &[AltSet]) -> AttentionFunction {
    AttentionFunction::from_fn(u, false, |m| table[menu_index(u, m)]).expect("valid table")
}

fn menu_index(u: &Universe, m: Menu) -> usize {
    // Frameless catalogs list menus in canonical order.
    u.menus(false).binary_search(&m).expect("menu of the universe")
}

fn accept(model: &AatModel, tree: &ChoiceTree, g: AttentionFunction) -> Result<Option<AatModel>, AatError> {
    let m = model.with_gamma(g);
    Ok(represent::verify_tree(&m, tree)?.passed().then_some(m))
}

/// An AAT representation whose Γ is an attention filter.
pub fn cla_representation(tree: &ChoiceTree) -> Result<Option<AatModel>, AatError> {
    let Some((model, bounds)) = envelope(tree)? else { return Ok(None) };
    let u = model.universe().clone();
    let menus = u.menus(false);
    let mut order: Vec<usize> = (0..menus.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(menus[i].len()));
    let mut assigned: Vec<Option<AltSet>> = vec![None; menus.len()];
    let mut budget = FILTER_SEARCH_BUDGET;
    let found = filter_search(&menus, &order, 0, &bounds, &mut assigned, &mut budget)?;
    match found {
        false => Ok(None),
        true => {
            let table: Vec<AltSet> = assigned.into_iter().map(|g| g.expect("assigned")).collect();
            accept(&model, tree, table_to_attention(&u, &table))
        }
    }
}

fn filter_search(
    menus: &[Menu],
    order: &[usize],
    k: usize,
    bounds: &AttentionBounds,
    assigned: &mut Vec<Option<AltSet>>,
    budget: &mut usize,
) -> Result<bool, AatError> {
    if k == order.len() {
        return Ok(true);
    }
    if *budget == 0 {
        return Err(AatError::LimitExceeded("attention-filter search budget exhausted".into()));
    }
    *budget -= 1;
    let i = order[k];
    let b = menus[i].set();
    let (lo, hi) = (bounds.lowers()[i], bounds.uppers()[i]);
    // Supersets C = B ∪ {y} with y unconsidered at C force Γ(B) = Γ(C).
    let mut forced: Option<AltSet> = None;
    for (j, m) in menus.iter().enumerate() {
        let c = m.set();
        if c.len() == b.len() + 1 && b.is_subset(c) {
            let gc = assigned[j].expect("larger menus come first");
            if gc.is_subset(b) {
                match forced {
                    Some(f) if f != gc => return Ok(false),
                    _ => forced = Some(gc),
                }
            }
        }
    }
    let candidates: Vec<AltSet> = match forced {
        Some(f) => {
            if lo.is_subset(f) && f.is_subset(hi) {
                vec![f]
            } else {
                vec![]
            }
        }
        None => {
            let free = hi.difference(lo);
            let mut v: Vec<AltSet> = free.subsets().map(|s| s.union(lo)).collect();
            v.sort_by_key(|s| std::cmp::Reverse(s.len()));
            v
        }
    };
    for g in candidates {
        assigned[i] = Some(g);
        if filter_search(menus, order, k + 1, bounds, assigned, budget)? {
            return Ok(true);
        }
    }
    assigned[i] = None;
    Ok(false)
}

/// An AAT representation whose Γ is a shortlist.
pub fn rsm_representation(tree: &ChoiceTree) -> Result<Option<AatModel>, AatError> {
    let Some((model, bounds)) = envelope(tree)? else { return Ok(None) };
    let u = model.universe().clone();
    let menus = u.menus(false);
    let pairs: Vec<usize> = (0..menus.len()).filter(|&i| menus[i].len() == 2).collect();
    let free: Vec<usize> = pairs.iter().copied().filter(|&i| bounds.uppers()[i].len() == 2).collect();
    for mask in 0u32..(1 << free.len()) {
        let mut edges = Vec::new();
        for &i in &pairs {
            let k = free.iter().position(|&f| f == i);
            let full = k.is_some_and(|k| mask & (1 << k) != 0);
            if !full {
                let x = bounds.lowers()[i].first().unwrap();
                edges.push((x, menus[i].set().without(x).first().unwrap()));
            }
        }
        let r = Rationale::new(&u, edges).expect("one direction per pair");
        let fits = menus.iter().enumerate().all(|(i, m)| {
            let g = r.undominated(m.set());
            bounds.lowers()[i].is_subset(g) && g.is_subset(bounds.uppers()[i])
        });
        if fits {
            if let Some(m) = accept(&model, tree, shortlist_from_rationale(&r)?)? {
                return Ok(Some(m));
            }
        }
    }
    Ok(None)
}

/// An AAT representation whose Γ is coarse-max: the least monotone Γ above
/// the defaults, which must fit under Γ⁺.
pub fn ctc_representation(tree: &ChoiceTree) -> Result<Option<AatModel>, AatError> {
    let Some((model, bounds)) = envelope(tree)? else { return Ok(None) };
    let u = model.universe().clone();
    let menus = u.menus(false);
    let c0: Vec<Alt> = bounds.lowers().iter().map(|s| s.first().unwrap()).collect();
    let mut table = Vec::with_capacity(menus.len());
    for (i, a) in menus.iter().enumerate() {
        let g = (0..menus.len())
            .filter(|&j| a.set().is_subset(menus[j].set()) && a.contains(c0[j]))
            .fold(AltSet::EMPTY, |s, j| s.with(c0[j]));
        if !g.is_subset(bounds.uppers()[i]) {
            return Ok(None);
        }
        table.push(g);
    }
    accept(&model, tree, table_to_attention(&u, &table))
}

pub fn is_cla_representable(oracle: &dyn BehaviorOracle, bound: usize) -> Result<bool, AatError> {
    Ok(cla_representation(&ChoiceTree::explore(oracle, bound)?)?.is_some())
}

pub fn is_rsm_representable(oracle: &dyn BehaviorOracle, bound: usize) -> Result<bool, AatError> {
    Ok(rsm_representation(&ChoiceTree::explore(oracle, bound)?)?.is_some())
}

pub fn is_ctc_representable(oracle: &dyn BehaviorOracle, bound: usize) -> Result<bool, AatError> {
    Ok(ctc_representation(&ChoiceTree::explore(oracle, bound)?)?.is_some())
}

/// Alternatives removed from consideration in some menu, keyed by menu.
pub fn exclusions(g: &AttentionFunction) -> Vec<(Menu, AltSet)> {
    g.iter()
        .filter(|(m, s)| *s != m.set())
        .map(|(m, s)| (m, m.set().difference(s)))
        .collect()
}
