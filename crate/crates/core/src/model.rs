//! Utilities, attention functions and the AAT choice engine.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::catalog::{Catalog, ProblemId};
use crate::error::AatError;
use crate::universe::{Alt, AltSet, Menu, Universe};

/// An injective utility over the universe, in exact rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct Utility {
    values: Vec<BigRational>,
    rank: Vec<u8>,
}

impl fmt::Debug for Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.values.iter().map(|v| v.to_string()))
            .finish()
    }
}

impl Utility {
    /// `values[i]` is the utility of the `i`-th alternative.
    pub fn new(universe: &Universe, values: Vec<BigRational>) -> Result<Utility, AatError> {
        if values.len() != universe.len() {
            return Err(AatError::InvalidUtility(format!(
                "{} values for {} alternatives",
                values.len(),
                universe.len()
            )));
        }
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                if values[i] == values[j] {
                    return Err(AatError::InvalidUtility(format!(
                        "`{}` and `{}` share the value {}",
                        universe.labels()[i],
                        universe.labels()[j],
                        values[i]
                    )));
                }
            }
        }
        let rank = values
            .iter()
            .map(|v| values.iter().filter(|w| *w < v).count() as u8)
            .collect();
        Ok(Utility { values, rank })
    }

    /// Consecutive integers down `best_to_worst`, the last one getting 1.
    pub fn from_ranking(universe: &Universe, best_to_worst: &[Alt]) -> Result<Utility, AatError> {
        let n = universe.len();
        if best_to_worst.len() != n || AltSet::from_alts(best_to_worst.iter().copied()) != universe.all() {
            return Err(AatError::InvalidUtility(
                "ranking must list every alternative once".into(),
            ));
        }
        let mut values = vec![BigRational::zero(); n];
        for (pos, a) in best_to_worst.iter().enumerate() {
            values[a.index()] = BigRational::from_integer(((n - pos) as i64).into());
        }
        Utility::new(universe, values)
    }

    pub fn value(&self, a: Alt) -> &BigRational {
        &self.values[a.index()]
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    /// Number of alternatives strictly below `a`.
    pub fn rank(&self, a: Alt) -> u8 {
        self.rank[a.index()]
    }

    pub fn prefers(&self, a: Alt, b: Alt) -> bool {
        self.rank[a.index()] > self.rank[b.index()]
    }

    /// Alternatives best first.
    pub fn order(&self) -> Vec<Alt> {
        let mut v: Vec<Alt> = (0..self.values.len()).map(Alt::from_index).collect();
        v.sort_by(|a, b| self.rank[b.index()].cmp(&self.rank[a.index()]));
        v
    }

    pub fn argmax(&self, s: AltSet) -> Option<Alt> {
        s.iter().max_by_key(|a| self.rank[a.index()])
    }

    /// The same order with `a` moved strictly below everything else.
    pub fn with_bottom(&self, universe: &Universe, a: Alt) -> Utility {
        let mut order: Vec<Alt> = self.order().into_iter().filter(|&b| b != a).collect();
        order.push(a);
        Utility::from_ranking(universe, &order).expect("permutation of the universe")
    }
}

/// A history-independent consideration map: every menu of the domain gets a
/// nonempty subset of itself.
#[derive(Clone, PartialEq, Eq)]
pub struct AttentionFunction {
    universe: Universe,
    singletons: bool,
    table: Vec<AltSet>,
}

impl fmt::Debug for AttentionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for menu in self.menus() {
            m.entry(
                &self.universe.menu_key(menu),
                &self.universe.set_key(self.get(menu)),
            );
        }
        m.finish()
    }
}

impl AttentionFunction {
    pub fn from_fn(
        universe: &Universe,
        singletons: bool,
        mut f: impl FnMut(Menu) -> AltSet,
    ) -> Result<AttentionFunction, AatError> {
        let mut table = vec![AltSet::EMPTY; 1 << universe.len()];
        for m in universe.menus(singletons) {
            let g = f(m);
            if g.is_empty() || !g.is_subset(m.set()) {
                return Err(AatError::InvalidAttention(format!(
                    "consideration {} is not a nonempty subset of {}",
                    universe.show_set(g),
                    universe.show_set(m.set())
                )));
            }
            table[m.set().bits() as usize] = g;
        }
        Ok(AttentionFunction {
            universe: universe.clone(),
            singletons,
            table,
        })
    }

    pub fn from_map(
        universe: &Universe,
        singletons: bool,
        map: &BTreeMap<Menu, AltSet>,
    ) -> Result<AttentionFunction, AatError> {
        for m in map.keys() {
            universe.menu_from_set(m.set(), singletons)?;
        }
        let mut missing = None;
        let g = AttentionFunction::from_fn(universe, singletons, |m| match map.get(&m) {
            Some(&s) => s,
            None => {
                missing.get_or_insert(m);
                m.set()
            }
        })?;
        if let Some(m) = missing {
            return Err(AatError::InvalidAttention(format!(
                "no consideration set given for menu {}",
                universe.menu_key(m)
            )));
        }
        Ok(g)
    }

    /// Γ(A) = A everywhere.
    pub fn full(universe: &Universe) -> AttentionFunction {
        AttentionFunction::from_fn(universe, false, |m| m.set()).expect("full attention is valid")
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn has_singletons(&self) -> bool {
        self.singletons
    }

    pub fn get(&self, menu: Menu) -> AltSet {
        self.table[menu.set().bits() as usize]
    }

    pub fn get_set(&self, s: AltSet) -> AltSet {
        self.table[s.bits() as usize]
    }

    pub fn menus(&self) -> Vec<Menu> {
        self.universe.menus(self.singletons)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Menu, AltSet)> + '_ {
        self.menus().into_iter().map(move |m| (m, self.get(m)))
    }

    /// A copy with one menu's consideration replaced.
    pub fn with(&self, menu: Menu, considered: AltSet) -> Result<AttentionFunction, AatError> {
        if considered.is_empty() || !considered.is_subset(menu.set()) {
            return Err(AatError::InvalidAttention(format!(
                "consideration {} is not a nonempty subset of {}",
                self.universe.show_set(considered),
                self.universe.show_set(menu.set())
            )));
        }
        let mut g = self.clone();
        g.table[menu.set().bits() as usize] = considered;
        Ok(g)
    }

    /// Pointwise union or intersection; the result must stay nonempty.
    pub fn combine(
        &self,
        other: &AttentionFunction,
        op: impl Fn(AltSet, AltSet) -> AltSet,
    ) -> Result<AttentionFunction, AatError> {
        AttentionFunction::from_fn(&self.universe, self.singletons, |m| op(self.get(m), other.get(m)))
    }
}

/// Precomputed stepping tables, indexed by problem id. Shared by plain and
/// framed models.
#[derive(Clone, Debug)]
pub struct Engine {
    masks: Vec<AltSet>,
    gamma: Vec<AltSet>,
    rank: Vec<u8>,
}

impl Engine {
    pub fn new(catalog: &Catalog, gamma: Vec<AltSet>, utility: &Utility) -> Engine {
        debug_assert_eq!(gamma.len(), catalog.len());
        Engine {
            masks: catalog.masks().to_vec(),
            gamma,
            rank: (0..catalog.universe().len())
                .map(|i| utility.rank(Alt::from_index(i)))
                .collect(),
        }
    }

    pub fn gamma(&self, p: ProblemId) -> AltSet {
        self.gamma[p.index()]
    }

    pub fn consider(&self, chosen: AltSet, p: ProblemId) -> AltSet {
        self.gamma[p.index()].union(chosen.intersection(self.masks[p.index()]))
    }

    pub fn best(&self, s: AltSet) -> Alt {
        let mut best = None;
        let mut best_rank = 0u8;
        for a in s.iter() {
            let r = self.rank[a.index()];
            if best.is_none() || r > best_rank {
                best = Some(a);
                best_rank = r;
            }
        }
        best.expect("consideration sets are nonempty")
    }

    pub fn step(&self, chosen: AltSet, p: ProblemId) -> Alt {
        self.best(self.consider(chosen, p))
    }

    /// Choices and the final chosen set along a problem sequence.
    pub fn run(&self, problems: &[ProblemId]) -> (Vec<Alt>, AltSet) {
        let mut chosen = AltSet::EMPTY;
        let mut out = Vec::with_capacity(problems.len());
        for &p in problems {
            let c = self.step(chosen, p);
            chosen = chosen.with(c);
            out.push(c);
        }
        (out, chosen)
    }
}

/// An Attention Across Time model: utility plus default attention.
#[derive(Clone, Debug)]
pub struct AatModel {
    utility: Utility,
    gamma: AttentionFunction,
    catalog: Catalog,
    engine: Engine,
}

impl AatModel {
    pub fn new(utility: Utility, gamma: AttentionFunction) -> AatModel {
        let catalog = Catalog::frameless(gamma.universe(), gamma.has_singletons());
        let table = catalog.ids().map(|p| gamma.get_set(catalog.mask(p))).collect();
        let engine = Engine::new(&catalog, table, &utility);
        AatModel {
            utility,
            gamma,
            catalog,
            engine,
        }
    }

    /// Standard utility maximization.
    pub fn full_attention(utility: Utility, universe: &Universe) -> AatModel {
        AatModel::new(utility, AttentionFunction::full(universe))
    }

    pub fn universe(&self) -> &Universe {
        self.gamma.universe()
    }

    pub fn utility(&self) -> &Utility {
        &self.utility
    }

    pub fn gamma(&self) -> &AttentionFunction {
        &self.gamma
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn with_gamma(&self, gamma: AttentionFunction) -> AatModel {
        AatModel::new(self.utility.clone(), gamma)
    }

    pub fn with_utility(&self, utility: Utility) -> AatModel {
        AatModel::new(utility, self.gamma.clone())
    }

    fn check(&self, m: Menu) -> Result<(), AatError> {
        self.universe()
            .menu_from_set(m.set(), self.gamma.has_singletons())
            .map(|_| ())
    }

    pub fn chosen_set(&self, h: &[Menu]) -> Result<AltSet, AatError> {
        let mut chosen = AltSet::EMPTY;
        for &m in h {
            self.check(m)?;
            let c = self.pick(chosen, m);
            chosen = chosen.with(c);
        }
        Ok(chosen)
    }

    fn pick(&self, chosen: AltSet, m: Menu) -> Alt {
        let s = self.gamma.get(m).union(chosen.intersection(m.set()));
        self.utility.argmax(s).expect("nonempty consideration")
    }

    /// Γ(A) ∪ (c(h) ∩ A).
    pub fn consideration(&self, h: &[Menu], a: Menu) -> Result<AltSet, AatError> {
        self.check(a)?;
        let chosen = self.chosen_set(h)?;
        Ok(self.gamma.get(a).union(chosen.intersection(a.set())))
    }

    pub fn choose(&self, h: &[Menu], a: Menu) -> Result<Alt, AatError> {
        self.check(a)?;
        let chosen = self.chosen_set(h)?;
        Ok(self.pick(chosen, a))
    }

    pub fn run_sequence(&self, menus: &[Menu]) -> Result<Vec<Alt>, AatError> {
        let mut chosen = AltSet::EMPTY;
        let mut out = Vec::with_capacity(menus.len());
        for &m in menus {
            self.check(m)?;
            let c = self.pick(chosen, m);
            chosen = chosen.with(c);
            out.push(c);
        }
        Ok(out)
    }

    /// The default choice c₀(A).
    pub fn default_choice(&self, a: Menu) -> Result<Alt, AatError> {
        self.choose(&[], a)
    }
}

/// Parses `"3"`, `"-2/7"` or a plain decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<BigRational, AatError> {
    let t = s.trim();
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        let num: num_bigint::BigInt = digits
            .parse()
            .map_err(|_| AatError::Format(format!("`{s}` is not a rational number")))?;
        let den = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
        let r = BigRational::new(num, den);
        return Ok(if neg { -r } else { r });
    }
    t.parse::<BigRational>()
        .map_err(|_| AatError::Format(format!("`{s}` is not a rational number")))
}

/// A rational in `[0, 1]`.
pub fn unit_interval(r: &BigRational) -> bool {
    *r >= BigRational::zero() && *r <= BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn m(u: &Universe, s: &[&str]) -> Menu {
        u.menu(s).unwrap()
    }

    #[test]
    fn late_warp_fixture_engine() {
        let model = fixtures::late_warp();
        let u = model.universe().clone();
        let h = vec![m(&u, &["y", "z'"])];
        let all = m(&u, &["x", "y", "z", "z'"]);
        assert_eq!(
            model.consideration(&h, all).unwrap(),
            u.set(&["y", "z"]).unwrap()
        );
        assert_eq!(u.label(model.choose(&h, all).unwrap()), "y");
        assert_eq!(u.label(model.choose(&h, m(&u, &["x", "y"])).unwrap()), "x");
        assert_eq!(model.chosen_set(&h).unwrap(), u.set(&["y"]).unwrap());
        let run = model
            .run_sequence(&[m(&u, &["y", "z'"]), all, m(&u, &["x", "y"])])
            .unwrap();
        let labels: Vec<&str> = run.iter().map(|&a| u.label(a)).collect();
        assert_eq!(labels, ["y", "y", "x"]);
    }

    #[test]
    fn worst_first_fixture_engine() {
        let model = fixtures::worst_first();
        let u = model.universe().clone();
        let xy = m(&u, &["x", "y"]);
        let yz = m(&u, &["y", "z"]);
        let xz = m(&u, &["x", "z"]);
        assert_eq!(model.consideration(&[yz], xy).unwrap(), xy.set());
        assert_eq!(u.label(model.choose(&[yz], xy).unwrap()), "y");
        assert_eq!(u.label(model.default_choice(xy).unwrap()), "x");
        assert_eq!(model.chosen_set(&[xz, yz]).unwrap(), u.set(&["x", "y"]).unwrap());
        assert_eq!(model.chosen_set(&[]).unwrap(), AltSet::EMPTY);
        let run = model.run_sequence(&[xy, yz, xy]).unwrap();
        let labels: Vec<&str> = run.iter().map(|&a| u.label(a)).collect();
        assert_eq!(labels, ["x", "y", "y"]);
    }

    #[test]
    fn full_attention_is_argmax() {
        let u = Universe::new(["x", "y", "z"]).unwrap();
        let order = [u.alt("x").unwrap(), u.alt("y").unwrap(), u.alt("z").unwrap()];
        let model = AatModel::full_attention(Utility::from_ranking(&u, &order).unwrap(), &u);
        let xy = m(&u, &["x", "y"]);
        assert_eq!(model.run_sequence(&[xy, xy]).unwrap(), vec![order[0], order[0]]);
        for a in u.menus(false) {
            assert_eq!(model.consideration(&[xy], a).unwrap(), a.set());
        }
    }

    #[test]
    fn utility_rejects_ties() {
        let u = Universe::new(["x", "y"]).unwrap();
        let one = BigRational::one();
        assert!(Utility::new(&u, vec![one.clone(), one]).is_err());
    }

    #[test]
    fn attention_must_be_total_and_inside() {
        let u = Universe::new(["x", "y", "z"]).unwrap();
        let bad = AttentionFunction::from_fn(&u, false, |_| u.set(&["x"]).unwrap());
        assert!(bad.is_err());
        let mut map = BTreeMap::new();
        map.insert(m(&u, &["x", "y"]), u.set(&["x"]).unwrap());
        assert!(AttentionFunction::from_map(&u, false, &map).is_err());
    }

    #[test]
    fn rationals_parse() {
        assert_eq!(parse_rational("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("-1.5").unwrap(), BigRational::new((-3).into(), 2.into()));
        assert!(parse_rational("abc").is_err());
    }
}
