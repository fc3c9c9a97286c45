//! Compatibility of one-shot choice-model classes with lasting
//! consideration: κ-cousins, WARP-convexity and a direct search over AAT
//! dynamics.
//!
//! Functions here are defined on every nonempty subset, singletons
//! included, so histories may add any alternative to the chosen set.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde_json::{json, Value};

use crate::error::AatError;
use crate::model::{AatModel, AttentionFunction, Utility};
use crate::universe::{Alt, AltSet, Universe};

/// Largest universe for class-level searches.
pub const MAX_CLASS_ALTERNATIVES: usize = 4;
/// Largest universe for enumerating WARP functions.
pub const MAX_WARP_ALTERNATIVES: usize = 5;

/// A choice from every nonempty subset.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChoiceFunction {
    n: u8,
    /// Indexed by subset bits; entry 0 is unused.
    table: Vec<Alt>,
}

impl ChoiceFunction {
    pub fn new(universe: &Universe, mut f: impl FnMut(AltSet) -> Alt) -> Result<ChoiceFunction, AatError> {
        let all = universe.all();
        let mut table = vec![Alt::from_index(0); 1 << universe.len()];
        for s in all.subsets().filter(|s| !s.is_empty()) {
            let a = f(s);
            if !s.contains(a) {
                return Err(AatError::InvalidMenu(format!(
                    "choice `{}` is not in {}",
                    universe.label(a),
                    universe.show_set(s)
                )));
            }
            table[s.bits() as usize] = a;
        }
        Ok(ChoiceFunction {
            n: universe.len() as u8,
            table,
        })
    }

    /// The maximizer of a strict order, best first.
    pub fn from_order(universe: &Universe, best_to_worst: &[Alt]) -> ChoiceFunction {
        let rank = ranks(universe, best_to_worst);
        ChoiceFunction::new(universe, |s| best_by(&rank, s)).expect("maximizer stays in the set")
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, s: AltSet) -> Alt {
        self.table[s.bits() as usize]
    }

    fn all(&self) -> AltSet {
        AltSet::from_bits(((1u64 << self.n) - 1) as u32)
    }

    fn subsets(&self) -> impl Iterator<Item = AltSet> {
        self.all().subsets().filter(|s| !s.is_empty())
    }

    /// f(𝒜), the alternatives ever chosen.
    pub fn image(&self) -> AltSet {
        self.subsets().fold(AltSet::EMPTY, |acc, s| acc.with(self.get(s)))
    }

    /// f(T) = f(S) whenever f(S) ∈ T ⊆ S.
    pub fn warp_violation(&self) -> Option<(AltSet, AltSet)> {
        for s in self.subsets() {
            let c = self.get(s);
            for t in s.subsets().filter(|t| t.contains(c)) {
                if self.get(t) != c {
                    return Some((s, t));
                }
            }
        }
        None
    }

    pub fn satisfies_warp(&self) -> bool {
        self.warp_violation().is_none()
    }

    pub fn to_json(&self, u: &Universe) -> Value {
        let mut m = serde_json::Map::new();
        let mut sets: Vec<AltSet> = self.subsets().filter(|s| s.len() >= 2).collect();
        sets.sort();
        for s in sets {
            m.insert(u.set_key(s), Value::String(u.label(self.get(s)).to_string()));
        }
        Value::Object(m)
    }
}

fn ranks(universe: &Universe, best_to_worst: &[Alt]) -> Vec<usize> {
    let mut r = vec![usize::MAX; universe.len()];
    for (i, &a) in best_to_worst.iter().enumerate() {
        r[a.index()] = i;
    }
    r
}

fn best_by(rank: &[usize], s: AltSet) -> Alt {
    s.iter().min_by_key(|a| rank[a.index()]).expect("nonempty")
}

/// All strict orders on the universe, best first, in lexicographic order.
pub fn linear_orders(universe: &Universe) -> Vec<Vec<Alt>> {
    fn rec(rest: &mut Vec<Alt>, cur: &mut Vec<Alt>, out: &mut Vec<Vec<Alt>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let a = rest.remove(i);
            cur.push(a);
            rec(rest, cur, out);
            cur.pop();
            rest.insert(i, a);
        }
    }
    let mut out = Vec::new();
    rec(&mut universe.alts().collect(), &mut Vec::new(), &mut out);
    out
}

/// The maximizers of all strict orders.
pub fn warp_functions(universe: &Universe) -> Result<Vec<ChoiceFunction>, AatError> {
    if universe.len() > MAX_WARP_ALTERNATIVES {
        return Err(AatError::LimitExceeded(format!(
            "WARP enumeration supports at most {MAX_WARP_ALTERNATIVES} alternatives"
        )));
    }
    let mut v: Vec<ChoiceFunction> = linear_orders(universe)
        .iter()
        .map(|o| ChoiceFunction::from_order(universe, o))
        .collect();
    v.sort();
    v.dedup();
    Ok(v)
}

/// g(A) = κ({f(A)} ∪ (A ∩ T)).
pub fn cousin(universe: &Universe, f: &ChoiceFunction, kappa: &ChoiceFunction, t: AltSet) -> ChoiceFunction {
    ChoiceFunction::new(universe, |a| kappa.get(a.intersection(t).with(f.get(a)))).expect("cousin stays in A")
}

/// One cousin per T ⊆ f(𝒜), deduplicated, with the first T producing it.
pub fn cousins(universe: &Universe, f: &ChoiceFunction, kappa: &ChoiceFunction) -> Vec<(AltSet, ChoiceFunction)> {
    let mut seen = BTreeSet::new();
    let mut ts: Vec<AltSet> = f.image().subsets().collect();
    ts.sort_by_key(|t| (t.len(), *t));
    ts.into_iter()
        .filter_map(|t| {
            let g = cousin(universe, f, kappa, t);
            seen.insert(g.clone()).then_some((t, g))
        })
        .collect()
}

/// An explicit finite class of choice functions.
#[derive(Clone, Debug)]
pub struct ChoiceClass {
    universe: Universe,
    members: Vec<ChoiceFunction>,
    index: HashMap<ChoiceFunction, usize>,
}

impl ChoiceClass {
    pub fn new(universe: &Universe, members: Vec<ChoiceFunction>) -> Result<ChoiceClass, AatError> {
        if members.is_empty() {
            return Err(AatError::InvalidParams("a class needs at least one member".into()));
        }
        let mut members = members;
        let mut seen = BTreeSet::new();
        members.retain(|f| seen.insert(f.clone()));
        if members.iter().any(|f| f.len() != universe.len()) {
            return Err(AatError::InvalidParams("class members live on another universe".into()));
        }
        let index = members.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
        Ok(ChoiceClass {
            universe: universe.clone(),
            members,
            index,
        })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn members(&self) -> &[ChoiceFunction] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, f: &ChoiceFunction) -> bool {
        self.index.contains_key(f)
    }

    fn guard(&self) -> Result<(), AatError> {
        if self.universe.len() > MAX_CLASS_ALTERNATIVES {
            return Err(AatError::LimitExceeded(format!(
                "class searches support at most {MAX_CLASS_ALTERNATIVES} alternatives"
            )));
        }
        Ok(())
    }
}

fn order_labels(u: &Universe, o: &[Alt]) -> Vec<String> {
    o.iter().map(|&a| u.label(a).to_string()).collect()
}

/// A candidate κ order, a chosen set T and the cousin it yields.
pub type Escape = (Vec<Alt>, AltSet, ChoiceFunction);

/// Outcome of the convexity test.
#[derive(Clone, Debug)]
pub struct ConvexityReport {
    pub convex: bool,
    /// Per member: the order whose maximizer keeps every cousin inside.
    pub certificates: Vec<Option<Vec<Alt>>>,
    /// The first member without a certificate, with one escaping (T, cousin)
    /// per candidate order.
    pub failure: Option<(usize, Vec<Escape>)>,
}

impl ConvexityReport {
    pub fn to_json(&self, class: &ChoiceClass) -> Value {
        let u = class.universe();
        json!({
            "warp_convex": self.convex,
            "certificates": self.certificates.iter().map(|c| c.as_ref().map(|o| order_labels(u, o))).collect::<Vec<_>>(),
            "failure": self.failure.as_ref().map(|(i, esc)| json!({
                "member": i,
                "function": class.members()[*i].to_json(u),
                "escapes": esc.iter().map(|(o, t, g)| json!({
                    "kappa_order": order_labels(u, o),
                    "chosen": u.set_labels(*t),
                    "cousin": g.to_json(u),
                })).collect::<Vec<_>>(),
            })),
        })
    }
}

pub fn is_warp_convex(class: &ChoiceClass) -> Result<ConvexityReport, AatError> {
    class.guard()?;
    let u = class.universe();
    let orders = linear_orders(u);
    let kappas: Vec<ChoiceFunction> = orders.iter().map(|o| ChoiceFunction::from_order(u, o)).collect();
    let mut certificates = Vec::with_capacity(class.len());
    let mut failure = None;
    for (i, f) in class.members().iter().enumerate() {
        let mut escapes = Vec::new();
        let mut cert = None;
        for (o, k) in orders.iter().zip(&kappas) {
            match cousins(u, f, k).into_iter().find(|(_, g)| !class.contains(g)) {
                None => {
                    cert = Some(o.clone());
                    break;
                }
                Some((t, g)) => escapes.push((o.clone(), t, g)),
            }
        }
        if cert.is_none() && failure.is_none() {
            failure = Some((i, escapes));
        }
        certificates.push(cert);
    }
    Ok(ConvexityReport {
        convex: failure.is_none(),
        certificates,
        failure,
    })
}

/// An AAT model on all nonempty subsets with c₀ = f: Γ(A) = {f(A)}.
pub fn model_for(universe: &Universe, f: &ChoiceFunction, best_to_worst: &[Alt]) -> AatModel {
    let u = Utility::from_ranking(universe, best_to_worst).expect("order is a permutation");
    let g = AttentionFunction::from_fn(universe, true, |m| AltSet::singleton(f.get(m.set()))).expect("f(A) ∈ A");
    AatModel::new(u, g)
}

/// The one-shot function of a model after histories with chosen set `t`.
pub fn one_shot(model: &AatModel, t: AltSet) -> ChoiceFunction {
    let e = model.engine();
    let cat = model.catalog();
    let mut table = vec![Alt::from_index(0); 1 << model.universe().len()];
    for p in cat.ids() {
        table[cat.mask(p).bits() as usize] = e.step(t, p);
    }
    ChoiceFunction {
        n: model.universe().len() as u8,
        table,
    }
}

/// Reachable chosen sets with a shortest history for each, found by BFS.
/// Multi-element menus are tried before singletons at every step.
pub fn reachable_states(model: &AatModel) -> Vec<(AltSet, Vec<AltSet>)> {
    let e = model.engine();
    let cat = model.catalog();
    let mut ids: Vec<_> = cat.ids().collect();
    ids.sort_by_key(|&p| (cat.mask(p).len() == 1, p));
    let mut seen: HashMap<AltSet, Vec<AltSet>> = HashMap::new();
    let mut order = vec![AltSet::EMPTY];
    seen.insert(AltSet::EMPTY, Vec::new());
    let mut queue = VecDeque::from([AltSet::EMPTY]);
    while let Some(t) = queue.pop_front() {
        for &p in &ids {
            let t2 = t.with(e.step(t, p));
            if !seen.contains_key(&t2) {
                let mut h = seen[&t].clone();
                h.push(cat.mask(p));
                seen.insert(t2, h);
                order.push(t2);
                queue.push_back(t2);
            }
        }
    }
    order.into_iter().map(|t| {
        let h = seen.remove(&t).expect("seen");
        (t, h)
    }).collect()
}

/// Why a member has no compatible AAT model: per utility order, a history
/// and the one-shot function it leads to outside the class.
#[derive(Clone, Debug)]
pub struct CompatFailure {
    pub member: usize,
    pub escapes: Vec<(Vec<Alt>, Vec<AltSet>, ChoiceFunction)>,
}

#[derive(Clone, Debug)]
pub struct CompatReport {
    pub compatible: bool,
    /// Per member: a utility order whose dynamics stay in the class.
    pub certificates: Vec<Option<Vec<Alt>>>,
    pub failure: Option<CompatFailure>,
}

impl CompatReport {
    pub fn to_json(&self, class: &ChoiceClass) -> Value {
        let u = class.universe();
        json!({
            "compatible": self.compatible,
            "certificates": self.certificates.iter().map(|c| c.as_ref().map(|o| order_labels(u, o))).collect::<Vec<_>>(),
            "failure": self.failure.as_ref().map(|f| json!({
                "member": f.member,
                "function": class.members()[f.member].to_json(u),
                "escapes": f.escapes.iter().map(|(o, h, g)| json!({
                    "utility_order": order_labels(u, o),
                    "history": h.iter().map(|m| u.set_labels(*m)).collect::<Vec<_>>(),
                    "one_shot": g.to_json(u),
                })).collect::<Vec<_>>(),
            })),
        })
    }
}

/// Does every member start an AAT model whose one-shot functions stay in
/// the class after every history?
pub fn is_compatible(class: &ChoiceClass) -> Result<CompatReport, AatError> {
    class.guard()?;
    let u = class.universe();
    let orders = linear_orders(u);
    let mut certificates = Vec::with_capacity(class.len());
    let mut failure = None;
    for (i, f) in class.members().iter().enumerate() {
        let mut escapes = Vec::new();
        let mut cert = None;
        for o in &orders {
            let model = model_for(u, f, o);
            let escape = reachable_states(&model)
                .into_iter()
                .map(|(t, h)| (h, one_shot(&model, t)))
                .find(|(_, g)| !class.contains(g));
            match escape {
                None => {
                    cert = Some(o.clone());
                    break;
                }
                Some((h, g)) => escapes.push((o.clone(), h, g)),
            }
        }
        if cert.is_none() && failure.is_none() {
            failure = Some(CompatFailure { member: i, escapes });
        }
        certificates.push(cert);
    }
    Ok(CompatReport {
        compatible: failure.is_none(),
        certificates,
        failure,
    })
}

/// Every choice function on the universe. Guarded to tiny universes.
pub fn all_functions(universe: &Universe) -> Result<Vec<ChoiceFunction>, AatError> {
    if universe.len() > 3 {
        return Err(AatError::LimitExceeded("all-function enumeration supports at most 3 alternatives".into()));
    }
    let sets: Vec<AltSet> = universe.all().subsets().filter(|s| s.len() >= 2).collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; sets.len()];
    loop {
        let f = ChoiceFunction::new(universe, |s| {
            if s.len() == 1 {
                s.first().unwrap()
            } else {
                let k = sets.iter().position(|&t| t == s).unwrap();
                s.iter().nth(pick[k]).unwrap()
            }
        })
        .expect("picks stay in their sets");
        out.push(f);
        let mut k = 0;
        loop {
            if k == sets.len() {
                out.sort();
                return Ok(out);
            }
            pick[k] += 1;
            if pick[k] < sets[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

fn attention_filters_all(universe: &Universe) -> Vec<Vec<AltSet>> {
    // Γ on every nonempty subset, indexed by bits, singletons fixed.
    let sets: Vec<AltSet> = universe.all().subsets().filter(|s| s.len() >= 2).collect();
    let mut out = Vec::new();
    let mut cur = vec![AltSet::EMPTY; 1 << universe.len()];
    for a in universe.alts() {
        cur[AltSet::singleton(a).bits() as usize] = AltSet::singleton(a);
    }
    fn rec(sets: &[AltSet], k: usize, cur: &mut Vec<AltSet>, out: &mut Vec<Vec<AltSet>>) {
        if k == sets.len() {
            let ok = sets.iter().all(|&a| {
                a.difference(cur[a.bits() as usize])
                    .iter()
                    .all(|y| cur[a.without(y).bits() as usize] == cur[a.bits() as usize])
            });
            if ok {
                out.push(cur.clone());
            }
            return;
        }
        for g in sets[k].subsets().filter(|g| !g.is_empty()) {
            cur[sets[k].bits() as usize] = g;
            rec(sets, k + 1, cur, out);
        }
    }
    rec(&sets, 0, &mut cur, &mut out);
    out
}

/// One-shot functions of limited attention with an attention filter:
/// ĉ(A) = max_u Γ(A).
pub fn cla_class(universe: &Universe) -> Result<ChoiceClass, AatError> {
    if universe.len() > 3 {
        return Err(AatError::LimitExceeded("CLA enumeration supports at most 3 alternatives".into()));
    }
    let filters = attention_filters_all(universe);
    let mut members = BTreeSet::new();
    for o in linear_orders(universe) {
        let rank = ranks(universe, &o);
        for g in &filters {
            members.insert(ChoiceFunction::new(universe, |s| best_by(&rank, g[s.bits() as usize]))?);
        }
    }
    ChoiceClass::new(universe, members.into_iter().collect())
}

/// Asymmetric relations as one of {none, forward, backward} per pair.
fn asymmetric_relations(universe: &Universe) -> Vec<Vec<(Alt, Alt)>> {
    let pairs: Vec<(Alt, Alt)> = universe
        .alts()
        .flat_map(|x| universe.alts().filter(move |&y| y > x).map(move |y| (x, y)))
        .collect();
    let mut out = Vec::new();
    let total = 3usize.pow(pairs.len() as u32);
    for mut code in 0..total {
        let mut rel = Vec::new();
        for &(x, y) in &pairs {
            match code % 3 {
                1 => rel.push((x, y)),
                2 => rel.push((y, x)),
                _ => {}
            }
            code /= 3;
        }
        out.push(rel);
    }
    out
}

fn maximal(rel: &[(Alt, Alt)], s: AltSet) -> AltSet {
    s.iter()
        .filter(|&y| !rel.iter().any(|&(a, b)| b == y && s.contains(a)))
        .fold(AltSet::EMPTY, AltSet::with)
}

/// One-shot functions of rational shortlist methods:
/// ĉ(A) = max(max(A, P₁), P₂) whenever that is always a single element.
pub fn rsm_class(universe: &Universe) -> Result<ChoiceClass, AatError> {
    if universe.len() > 3 {
        return Err(AatError::LimitExceeded("RSM enumeration supports at most 3 alternatives".into()));
    }
    let rels = asymmetric_relations(universe);
    let sets: Vec<AltSet> = universe.all().subsets().filter(|s| !s.is_empty()).collect();
    let mut members = BTreeSet::new();
    for p1 in &rels {
        for p2 in &rels {
            if sets.iter().all(|&s| maximal(p2, maximal(p1, s)).len() == 1) {
                members.insert(ChoiceFunction::new(universe, |s| {
                    maximal(p2, maximal(p1, s)).first().unwrap()
                })?);
            }
        }
    }
    ChoiceClass::new(universe, members.into_iter().collect())
}

/// The four-alternative cyclic function joined to every WARP function.
pub fn cyclic_class() -> ChoiceClass {
    let u = Universe::new(["1", "2", "3", "4"]).expect("valid labels");
    let mut members = warp_functions(&u).expect("small universe");
    members.push(cyclic_function(&u));
    ChoiceClass::new(&u, members).expect("nonempty")
}

/// f({1,2})=1, f({2,3})=2, f({3,4})=3, f({1,4})=4, f({1,2,3})=3,
/// f({2,3,4})=4, f({1,3,4})=1, f({1,2,4})=2; the remaining menus pick
/// f({1,3})=1, f({2,4})=2 and f({1,2,3,4})=1.
pub fn cyclic_function(u: &Universe) -> ChoiceFunction {
    let table = [
        ("1|2", "1"),
        ("2|3", "2"),
        ("3|4", "3"),
        ("1|4", "4"),
        ("1|2|3", "3"),
        ("2|3|4", "4"),
        ("1|3|4", "1"),
        ("1|2|4", "2"),
        ("1|3", "1"),
        ("2|4", "2"),
        ("1|2|3|4", "1"),
    ];
    let map: HashMap<AltSet, Alt> = table
        .iter()
        .map(|(k, v)| (u.parse_key(k).unwrap(), u.alt(v).unwrap()))
        .collect();
    ChoiceFunction::new(u, |s| if s.len() == 1 { s.first().unwrap() } else { map[&s] }).expect("valid table")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warp_counts() {
        for (n, k) in [(2, 2), (3, 6), (4, 24)] {
            let labels: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
            let u = Universe::new(labels).unwrap();
            assert_eq!(warp_functions(&u).unwrap().len(), k);
        }
    }

    #[test]
    fn cousin_of_cyclic_function() {
        let u = Universe::new(["1", "2", "3", "4"]).unwrap();
        let f = cyclic_function(&u);
        let order: Vec<Alt> = ["1", "2", "3", "4"].iter().map(|l| u.alt(l).unwrap()).collect();
        let kappa = ChoiceFunction::from_order(&u, &order);
        let g = cousin(&u, &f, &kappa, u.set(&["2"]).unwrap());
        let at = |k: &str| u.label(g.get(u.parse_key(k).unwrap())).to_string();
        assert_eq!((at("1|2|4"), at("1|2"), at("2|3")), ("2".into(), "1".into(), "2".into()));
    }

    #[test]
    fn empty_t_gives_f() {
        let u = Universe::new(["x", "y", "z"]).unwrap();
        for f in all_functions(&u).unwrap() {
            for k in warp_functions(&u).unwrap() {
                assert_eq!(cousin(&u, &f, &k, AltSet::EMPTY), f);
            }
        }
    }

    #[test]
    fn cyclic_class_fails_both_ways() {
        let class = cyclic_class();
        let c = is_warp_convex(&class).unwrap();
        let d = is_compatible(&class).unwrap();
        assert!(!c.convex && !d.compatible);
        let fail = d.failure.unwrap();
        assert_eq!(fail.member, class.len() - 1);
        let u = class.universe();
        let (_, h, _) = fail
            .escapes
            .iter()
            .find(|(o, _, _)| u.label(o[0]) == "1" && u.label(o[1]) == "2")
            .unwrap();
        assert!(!h.is_empty());
    }

    #[test]
    fn warp_class_passes_both_ways() {
        let u = Universe::new(["x", "y", "z"]).unwrap();
        let class = ChoiceClass::new(&u, warp_functions(&u).unwrap()).unwrap();
        assert!(is_warp_convex(&class).unwrap().convex);
        assert!(is_compatible(&class).unwrap().compatible);
    }

    #[test]
    fn structure_classes_contain_warp() {
        let u = Universe::new(["x", "y", "z"]).unwrap();
        let cla = cla_class(&u).unwrap();
        let rsm = rsm_class(&u).unwrap();
        for w in warp_functions(&u).unwrap() {
            assert!(cla.contains(&w) && rsm.contains(&w));
        }
        assert!(cla.len() > 6 && rsm.len() > 6);
    }
}
