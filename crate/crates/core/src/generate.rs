//! Random models for property tests and the acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::catalog::{Catalog, Frame, Problem};
use crate::frames::AatfModel;
use crate::model::{AatModel, AttentionFunction, Utility};
use crate::structures::{coarse_max_from_rationale, Rationale, SetRationale};
use crate::universe::{Alt, AltSet, Menu, Universe};

/// Labels a, b, c, ...
pub fn universe(n: usize) -> Universe {
    Universe::new((0..n).map(|i| ((b'a' + i as u8) as char).to_string())).expect("small universe")
}

pub fn random_order<R: Rng>(rng: &mut R, u: &Universe) -> Vec<Alt> {
    let mut o: Vec<Alt> = u.alts().collect();
    o.shuffle(rng);
    o
}

pub fn random_utility<R: Rng>(rng: &mut R, u: &Universe) -> Utility {
    Utility::from_ranking(u, &random_order(rng, u)).expect("permutation")
}

/// A uniformly random nonempty subset of `s`.
pub fn random_subset<R: Rng>(rng: &mut R, s: AltSet) -> AltSet {
    loop {
        let t = s.iter().filter(|_| rng.gen_bool(0.5)).fold(AltSet::EMPTY, AltSet::with);
        if !t.is_empty() {
            return t;
        }
    }
}

/// Independent nonempty consideration sets.
pub fn random_gamma<R: Rng>(rng: &mut R, u: &Universe) -> AttentionFunction {
    AttentionFunction::from_fn(u, false, |m| random_subset(rng, m.set())).expect("subsets of menus")
}

pub fn random_model<R: Rng>(rng: &mut R, n: usize) -> AatModel {
    let u = universe(n);
    AatModel::new(random_utility(rng, &u), random_gamma(rng, &u))
}

/// An attention filter: Γ(A∖y) = Γ(A) whenever y ∉ Γ(A). Filled from the
/// largest menus down, with forced values propagated and a few restarts;
/// falls back to the top entries of a random salience order.
pub fn random_filter<R: Rng>(rng: &mut R, u: &Universe) -> AttentionFunction {
    let mut menus = u.menus(false);
    menus.sort_by_key(|m| std::cmp::Reverse(m.len()));
    'restart: for _ in 0..20 {
        let mut g: std::collections::HashMap<Menu, AltSet> = Default::default();
        for &m in &menus {
            let gm = *g.entry(m).or_insert_with(|| random_subset(rng, m.set()));
            for y in m.set().difference(gm).iter() {
                let sub = m.set().without(y);
                if sub.len() < 2 {
                    continue;
                }
                let sm = u.menu_from_set(sub, false).expect("menu");
                match g.get(&sm) {
                    Some(&prev) if prev != gm => continue 'restart,
                    _ => {
                        g.insert(sm, gm);
                    }
                }
            }
        }
        return AttentionFunction::from_fn(u, false, |m| g[&m]).expect("valid");
    }
    let salience = random_order(rng, u);
    let k = rng.gen_range(1..=u.len());
    AttentionFunction::from_fn(u, false, |m| {
        salience
            .iter()
            .copied()
            .filter(|&a| m.contains(a))
            .take(k)
            .fold(AltSet::EMPTY, AltSet::with)
    })
    .expect("valid")
}

/// A random acyclic rationale, so every menu keeps an undominated member.
pub fn random_rationale<R: Rng>(rng: &mut R, u: &Universe) -> Rationale {
    let o = random_order(rng, u);
    let p = rng.gen_range(0.2..0.7);
    let mut edges = Vec::new();
    for i in 0..o.len() {
        for j in i + 1..o.len() {
            if rng.gen_bool(p) {
                edges.push((o[i], o[j]));
            }
        }
    }
    Rationale::new(u, edges).expect("acyclic")
}

/// Random set edges, each kept only if no menu ends up fully shaded.
pub fn random_set_rationale<R: Rng>(rng: &mut R, u: &Universe) -> SetRationale {
    let all = u.all();
    let tries = rng.gen_range(1..=2 * u.len());
    let mut edges: Vec<(AltSet, AltSet)> = Vec::new();
    for _ in 0..tries {
        let d = random_subset(rng, all);
        let rest = all.difference(d);
        if rest.is_empty() {
            continue;
        }
        let e = random_subset(rng, rest);
        let mut cand = edges.clone();
        cand.push((d, e));
        if let Ok(sr) = SetRationale::new(u, cand.clone()) {
            if coarse_max_from_rationale(&sr).is_ok() {
                edges = cand;
            }
        }
    }
    SetRationale::new(u, edges).expect("kept edges are valid")
}

/// Which frame family a random framed model uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameKind {
    Generic,
    List,
    Rec,
}

/// Every menu under one or two distinct random frames.
pub fn random_catalog<R: Rng>(rng: &mut R, u: &Universe, kind: FrameKind) -> Catalog {
    let mut problems = Vec::new();
    for m in u.menus(false) {
        let k = rng.gen_range(1..=2);
        let mut frames: Vec<Frame> = Vec::new();
        for _ in 0..k {
            let f = match kind {
                FrameKind::Generic => Frame::Generic(format!("f{}", rng.gen_range(0..2))),
                FrameKind::List => {
                    let mut o: Vec<Alt> = m.iter().collect();
                    o.shuffle(rng);
                    Frame::List(o)
                }
                FrameKind::Rec => Frame::Rec(m.iter().filter(|_| rng.gen_bool(0.4)).fold(AltSet::EMPTY, AltSet::with)),
            };
            if !frames.contains(&f) {
                frames.push(f);
            }
        }
        problems.extend(frames.into_iter().map(|f| Problem { menu: m, frame: Some(f) }));
    }
    Catalog::framed(u, problems).expect("covers every menu")
}

/// A framed model with unrestricted consideration sets.
pub fn random_framed_model<R: Rng>(rng: &mut R, n: usize, kind: FrameKind) -> AatfModel {
    let u = universe(n);
    let utility = random_utility(rng, &u);
    let cat = random_catalog(rng, &u, kind);
    AatfModel::from_fn(utility, cat, |p| random_subset(rng, p.menu.set())).expect("valid")
}

/// A framed model whose consideration sets follow the frame: a top slice of
/// each list, or the recommendations plus random extras.
pub fn random_structured_model<R: Rng>(rng: &mut R, n: usize, kind: FrameKind) -> AatfModel {
    let u = universe(n);
    let utility = random_utility(rng, &u);
    let cat = random_catalog(rng, &u, kind);
    AatfModel::from_fn(utility, cat, |p| match p.frame.as_ref().expect("framed") {
        Frame::List(o) => {
            let k = rng.gen_range(1..=o.len());
            AltSet::from_alts(o[..k].iter().copied())
        }
        Frame::Rec(s) => s.union(random_subset(rng, p.menu.set())),
        Frame::Generic(_) => random_subset(rng, p.menu.set()),
    })
    .expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{is_attention_filter, is_coarse_max, is_shortlist};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_respect_their_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 3..=4 {
            let u = universe(n);
            for _ in 0..20 {
                assert!(is_attention_filter(&random_filter(&mut rng, &u)));
                let r = random_rationale(&mut rng, &u);
                assert!(is_shortlist(&crate::structures::shortlist_from_rationale(&r).unwrap()));
                let sr = random_set_rationale(&mut rng, &u);
                assert!(is_coarse_max(&coarse_max_from_rationale(&sr).unwrap()));
            }
        }
    }
}
