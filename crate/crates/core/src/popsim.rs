//! Between-subject test of convergence: two treatment orders over
//! X = {x,y,z}, closed-form ratios, micro-simulation of AAT agents and
//! recovery of the z-cell parameters from choice patterns.
//!
//! Group A faces ({x,y,z}, {x,y}); group B faces ({x,y}, {x,y,z}).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::AatError;
use crate::model::{unit_interval, AatModel, AttentionFunction, Utility};
use crate::universe::{Alt, AltSet, Menu, Universe};

/// First-period cells: choice from {x,y,z}, then from {x,y}.
pub const CELLS: [&str; 6] = ["xx", "xy", "yx", "yy", "zx", "zy"];
/// Cells split by a preference fraction.
pub const LAMBDA_CELLS: [&str; 4] = ["xy", "yx", "zx", "zy"];

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// P_ij and λ's. λ_xy and λ_yx are the shares preferring x to y, λ_zx the
/// share preferring x to z, λ_zy the share preferring z to y.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PopulationParams {
    p: BTreeMap<&'static str, BigRational>,
    lambda: BTreeMap<&'static str, BigRational>,
}

fn cell_name(c: &str, names: &[&'static str]) -> Result<&'static str, AatError> {
    names
        .iter()
        .copied()
        .find(|&n| n == c)
        .ok_or_else(|| AatError::InvalidParams(format!("unknown cell `{c}`")))
}

impl PopulationParams {
    /// Missing P cells are zero; every λ must be given.
    pub fn new(p: &[(&str, BigRational)], lambda: &[(&str, BigRational)]) -> Result<PopulationParams, AatError> {
        let mut pm: BTreeMap<&'static str, BigRational> = CELLS.iter().map(|&c| (c, BigRational::zero())).collect();
        for (c, v) in p {
            pm.insert(cell_name(c, &CELLS)?, v.clone());
        }
        let mut lm = BTreeMap::new();
        for (c, v) in lambda {
            lm.insert(cell_name(c, &LAMBDA_CELLS)?, v.clone());
        }
        for c in LAMBDA_CELLS {
            if !lm.contains_key(c) {
                return Err(AatError::InvalidParams(format!("lambda_{c} is missing")));
            }
        }
        for (c, v) in pm.iter().map(|(c, v)| (format!("P_{c}"), v)).chain(lm.iter().map(|(c, v)| (format!("lambda_{c}"), v))) {
            if !unit_interval(v) {
                return Err(AatError::InvalidParams(format!("{c} = {v} is outside [0,1]")));
            }
        }
        let total: BigRational = pm.values().sum();
        if !total.is_one() {
            return Err(AatError::InvalidParams(format!("P fractions sum to {total}, not 1")));
        }
        Ok(PopulationParams { p: pm, lambda: lm })
    }

    pub fn p(&self, cell: &str) -> &BigRational {
        &self.p[cell]
    }

    pub fn lambda(&self, cell: &str) -> &BigRational {
        &self.lambda[cell]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "P": self.p.iter().map(|(c, v)| (c.to_string(), Value::String(v.to_string()))).collect::<serde_json::Map<_, _>>(),
            "lambda": self.lambda.iter().map(|(c, v)| (c.to_string(), Value::String(v.to_string()))).collect::<serde_json::Map<_, _>>(),
        })
    }
}

/// A nonnegative ratio that may divide by zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ratio {
    Finite(BigRational),
    /// Positive over zero.
    Infinite,
    /// Zero over zero.
    Undefined,
}

impl Ratio {
    pub fn of(num: BigRational, den: BigRational) -> Ratio {
        match (num.is_zero(), den.is_zero()) {
            (_, false) => Ratio::Finite(num / den),
            (false, true) => Ratio::Infinite,
            (true, true) => Ratio::Undefined,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Ratio::Finite(r) => crate::io::rational_json(r),
            Ratio::Infinite => json!({"exact": "inf", "decimal": null}),
            Ratio::Undefined => json!({"exact": "undefined", "decimal": null}),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => write!(f, "{r}"),
            Ratio::Infinite => f.write_str("inf"),
            Ratio::Undefined => f.write_str("undefined"),
        }
    }
}

/// x-to-y ratios per group and period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioReport {
    pub a_t1: Ratio,
    pub b_t1: Ratio,
    pub a_t2: Ratio,
    pub b_t2: Ratio,
}

impl RatioReport {
    pub fn converged(&self) -> bool {
        self.a_t2 == self.b_t2
    }

    pub fn to_json(&self) -> Value {
        json!({
            "R_A_t1": self.a_t1.to_json(),
            "R_B_t1": self.b_t1.to_json(),
            "R_A_t2": self.a_t2.to_json(),
            "R_B_t2": self.b_t2.to_json(),
            "converged": self.converged(),
        })
    }
}

/// The t=1 ratio for B counts the z cells too: they choose x or y from the
/// pair in the first period. With P_zx = P_zy = 0 this is the usual form.
pub fn ratios_closed_form(params: &PopulationParams) -> RatioReport {
    let p = |c| params.p(c).clone();
    let l = |c| params.lambda(c).clone();
    let one = BigRational::one();
    let num = p("xx") + p("xy") * l("xy") + p("yx") * l("yx");
    let den = p("yy") + p("xy") * (&one - l("xy")) + p("yx") * (&one - l("yx"));
    RatioReport {
        a_t1: Ratio::of(p("xx") + p("xy"), p("yy") + p("yx")),
        b_t1: Ratio::of(p("xx") + p("yx") + p("zx"), p("yy") + p("xy") + p("zy")),
        a_t2: Ratio::of(&num + p("zx"), &den + p("zy")),
        b_t2: Ratio::of(num + p("zx") * l("zx"), den + p("zy") * (one - l("zy"))),
    }
}

/// The universe {x,y,z} and its two treatment menus.
pub struct Treatments {
    pub universe: Universe,
    pub grand: Menu,
    pub pair: Menu,
}

impl Treatments {
    pub fn new() -> Treatments {
        let universe = Universe::new(["x", "y", "z"]).expect("valid labels");
        let grand = universe.menu(&["x", "y", "z"]).expect("menu");
        let pair = universe.menu(&["x", "y"]).expect("menu");
        Treatments { universe, grand, pair }
    }

    fn a(&self, l: &str) -> Alt {
        self.universe.alt(l).expect("known label")
    }
}

impl Default for Treatments {
    fn default() -> Self {
        Treatments::new()
    }
}

/// A template agent for cell `cell`; `prefers_first` picks the λ share.
/// In the xy and yx cells z is ranked last; `z_rank` moves it. Choices in
/// the treatments do not depend on that placement.
pub fn template(t: &Treatments, cell: &str, prefers_first: bool, z_rank: usize) -> Result<AatModel, AatError> {
    let cell = cell_name(cell, &CELLS)?;
    let (first, second) = (t.a(&cell[..1]), t.a(&cell[1..]));
    let (x, y, z) = (t.a("x"), t.a("y"), t.a("z"));
    let order: Vec<Alt> = match cell {
        "xx" => vec![x, y, z],
        "yy" => vec![y, x, z],
        // λ_xy and λ_yx both count those preferring x to y.
        "xy" | "yx" => {
            let mut o = if prefers_first { vec![x, y] } else { vec![y, x] };
            o.insert(z_rank.min(2), z);
            o
        }
        "zx" => if prefers_first { vec![x, z, y] } else { vec![z, x, y] },
        "zy" => if prefers_first { vec![z, y, x] } else { vec![y, z, x] },
        _ => unreachable!(),
    };
    let utility = Utility::from_ranking(&t.universe, &order)?;
    let (grand, pair) = (t.grand, t.pair);
    let gamma = AttentionFunction::from_fn(&t.universe, false, |m| {
        if m == grand {
            AltSet::singleton(first)
        } else if m == pair {
            AltSet::singleton(second)
        } else {
            m.set()
        }
    })?;
    let model = AatModel::new(utility, gamma);
    if model.default_choice(grand)? != first || model.default_choice(pair)? != second {
        return Err(AatError::InvalidParams(format!("template for cell {cell} misses its first-period choices")));
    }
    Ok(model)
}

/// A weighted agent type.
#[derive(Clone, Debug)]
pub struct Agent {
    pub model: AatModel,
    pub count: u64,
}

fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.lcm(b)
}

fn shares(params: &PopulationParams) -> Vec<(&'static str, bool, BigRational)> {
    let one = BigRational::one();
    let mut out = Vec::new();
    for c in CELLS {
        let p = params.p(c).clone();
        if LAMBDA_CELLS.contains(&c) {
            let l = params.lambda(c).clone();
            out.push((c, true, &p * &l));
            out.push((c, false, p * (&one - l)));
        } else {
            out.push((c, true, p));
        }
    }
    out
}

/// The smallest population whose cell counts are all integers.
pub fn minimal_population(params: &PopulationParams) -> BigInt {
    shares(params)
        .iter()
        .fold(BigInt::one(), |acc, (_, _, s)| lcm(&acc, s.denom()))
}

/// Agents realizing `params` exactly in a population of `size`, or the
/// minimal exact population when `size` is None.
pub fn population_from_params(params: &PopulationParams, size: Option<u64>) -> Result<Vec<Agent>, AatError> {
    let t = Treatments::new();
    let n = match size {
        Some(n) => BigInt::from(n),
        None => minimal_population(params),
    };
    let mut agents = Vec::new();
    for (cell, first, share) in shares(params) {
        let c = share * BigRational::from_integer(n.clone());
        if !c.is_integer() {
            return Err(AatError::InvalidParams(format!(
                "a population of {n} cannot realize cell {cell} exactly"
            )));
        }
        let count = c.to_integer().to_u64().ok_or_else(|| AatError::LimitExceeded("population too large".into()))?;
        if count > 0 {
            agents.push(Agent {
                model: template(&t, cell, first, 2)?,
                count,
            });
        }
    }
    Ok(agents)
}

/// How agents are split into the two treatments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Assignment {
    /// Both groups receive the whole population.
    Proportional,
    /// Each individual joins A or B by a fair coin.
    Random { seed: u64 },
}

/// Counts of (first, second) choices in one group.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PatternCounts {
    counts: BTreeMap<(Alt, Alt), u64>,
}

impl PatternCounts {
    pub fn add(&mut self, first: Alt, second: Alt, n: u64) {
        if n > 0 {
            *self.counts.entry((first, second)).or_insert(0) += n;
        }
    }

    pub fn get(&self, first: Alt, second: Alt) -> u64 {
        self.counts.get(&(first, second)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((Alt, Alt), u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Share of the group with this pattern.
    pub fn share(&self, first: Alt, second: Alt) -> BigRational {
        q(self.get(first, second) as i64, self.total().max(1) as i64)
    }

    fn count_where(&self, f: impl Fn(Alt, Alt) -> bool) -> u64 {
        self.iter().filter(|&((a, b), _)| f(a, b)).map(|(_, n)| n).sum()
    }

    fn period_ratio(&self, period: usize, x: Alt, y: Alt) -> Ratio {
        let pick = |a: Alt, b: Alt| if period == 1 { a } else { b };
        let nx = self.count_where(|a, b| pick(a, b) == x);
        let ny = self.count_where(|a, b| pick(a, b) == y);
        Ratio::of(q(nx as i64, 1), q(ny as i64, 1))
    }

    pub fn to_json(&self, u: &Universe) -> Value {
        Value::Object(
            self.iter()
                .map(|((a, b), n)| (format!("{}{}", u.label(a), u.label(b)), json!(n)))
                .collect(),
        )
    }
}

#[derive(Clone, Debug)]
pub struct SimulationReport {
    pub group_a: PatternCounts,
    pub group_b: PatternCounts,
    pub ratios: RatioReport,
}

impl SimulationReport {
    pub fn to_json(&self) -> Value {
        let u = Treatments::new().universe;
        json!({
            "group_a": self.group_a.to_json(&u),
            "group_b": self.group_b.to_json(&u),
            "ratios": self.ratios.to_json(),
        })
    }
}

/// Runs both treatment orders. Agents must live on {x,y,z}.
pub fn simulate_population(agents: &[Agent], assignment: Assignment) -> Result<SimulationReport, AatError> {
    let t = Treatments::new();
    let mut a = PatternCounts::default();
    let mut b = PatternCounts::default();
    let mut rng = match assignment {
        Assignment::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Assignment::Proportional => None,
    };
    for agent in agents {
        if agent.model.universe() != &t.universe {
            return Err(AatError::InvalidParams("agents must be defined on {x,y,z}".into()));
        }
        let ra = agent.model.run_sequence(&[t.grand, t.pair])?;
        let rb = agent.model.run_sequence(&[t.pair, t.grand])?;
        let (na, nb) = match rng.as_mut() {
            None => (agent.count, agent.count),
            Some(r) => {
                let na = (0..agent.count).filter(|_| r.gen_bool(0.5)).count() as u64;
                (na, agent.count - na)
            }
        };
        a.add(ra[0], ra[1], na);
        b.add(rb[0], rb[1], nb);
    }
    if a.total() == 0 || b.total() == 0 {
        return Err(AatError::InvalidParams("a treatment group is empty".into()));
    }
    let (x, y) = (t.a("x"), t.a("y"));
    let ratios = RatioReport {
        a_t1: a.period_ratio(1, x, y),
        b_t1: b.period_ratio(1, x, y),
        a_t2: a.period_ratio(2, x, y),
        b_t2: b.period_ratio(2, x, y),
    };
    Ok(SimulationReport {
        group_a: a,
        group_b: b,
        ratios,
    })
}

/// Estimates from pattern shares. λ's are None when their cell is empty.
/// They read as preferences only under the interpretation that a cell's
/// first-period choices reflect what its members consider.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identification {
    pub p_zx: BigRational,
    pub p_zy: BigRational,
    pub lambda_zx: Option<BigRational>,
    pub lambda_zy: Option<BigRational>,
    pub predicted_b_t2: Ratio,
    pub observed_b_t2: Ratio,
    pub consistent: bool,
}

impl Identification {
    pub fn to_json(&self) -> Value {
        let opt = |r: &Option<BigRational>| r.as_ref().map(crate::io::rational_json);
        json!({
            "P_zx": crate::io::rational_json(&self.p_zx),
            "P_zy": crate::io::rational_json(&self.p_zy),
            "lambda_zx": opt(&self.lambda_zx),
            "lambda_zy": opt(&self.lambda_zy),
            "predicted_R_B_t2": self.predicted_b_t2.to_json(),
            "observed_R_B_t2": self.observed_b_t2.to_json(),
            "consistent": self.consistent,
            "interpretation": "lambda shares describe preferences only if first-period choices reflect consideration as modeled",
        })
    }
}

/// Recovers P_zx, P_zy, λ_zx, λ_zy and checks R_B at t=2 against the value
/// predicted from group A.
pub fn identify_from_patterns(a: &PatternCounts, b: &PatternCounts) -> Result<Identification, AatError> {
    let t = Treatments::new();
    let (x, y, z) = (t.a("x"), t.a("y"), t.a("z"));
    if a.total() == 0 || b.total() == 0 {
        return Err(AatError::InvalidParams("a treatment group is empty".into()));
    }
    let in_menu = |s: &PatternCounts, first: AltSet, second: AltSet| {
        s.iter().all(|((f, g), _)| first.contains(f) && second.contains(g))
    };
    if !in_menu(a, t.grand.set(), t.pair.set()) || !in_menu(b, t.pair.set(), t.grand.set()) {
        return Err(AatError::InvalidParams("a pattern chooses outside its menus".into()));
    }
    let p_zx = a.share(z, x);
    let p_zy = a.share(z, y);
    let bxz = b.share(x, z);
    let byz = b.share(y, z);
    let fail = |what: &str| AatError::InvalidParams(format!("identification failed: {what}"));
    let lambda_zx = if p_zx.is_zero() {
        if !bxz.is_zero() {
            return Err(fail("group B shows (x,z) but group A has no (z,x)"));
        }
        None
    } else {
        let l = BigRational::one() - &bxz / &p_zx;
        if !unit_interval(&l) {
            return Err(fail("share of (x,z) in group B exceeds share of (z,x) in group A"));
        }
        Some(l)
    };
    let lambda_zy = if p_zy.is_zero() {
        if !byz.is_zero() {
            return Err(fail("group B shows (y,z) but group A has no (z,y)"));
        }
        None
    } else {
        let l = &byz / &p_zy;
        if !unit_interval(&l) {
            return Err(fail("share of (y,z) in group B exceeds share of (z,y) in group A"));
        }
        Some(l)
    };
    // Group A second period: num + P_zx and den + P_zy.
    let second = |s: &PatternCounts, c: Alt| -> BigRational {
        [x, y, z].iter().map(|&f| s.share(f, c)).sum()
    };
    let num = second(a, x) - &p_zx;
    let den = second(a, y) - &p_zy;
    let lzx = lambda_zx.clone().unwrap_or_else(BigRational::zero);
    let lzy = lambda_zy.clone().unwrap_or_else(BigRational::zero);
    let predicted = Ratio::of(num + &p_zx * lzx, den + &p_zy * (BigRational::one() - lzy));
    let observed = Ratio::of(second(b, x), second(b, y));
    Ok(Identification {
        consistent: predicted == observed,
        p_zx,
        p_zy,
        lambda_zx,
        lambda_zy,
        predicted_b_t2: predicted,
        observed_b_t2: observed,
    })
}

/// Random params with denominators dividing `den`. Without `with_z` the
/// z cells are empty; with it both are positive.
pub fn random_params<R: Rng>(rng: &mut R, den: i64, with_z: bool) -> PopulationParams {
    let cells: &[&str] = if with_z { &CELLS } else { &CELLS[..4] };
    loop {
        let weights: Vec<i64> = cells.iter().map(|_| rng.gen_range(0..=den)).collect();
        let total: i64 = weights.iter().sum();
        if total == 0 || (with_z && (weights[4] == 0 || weights[5] == 0)) {
            continue;
        }
        let p: Vec<(&str, BigRational)> = cells.iter().zip(&weights).map(|(&c, &w)| (c, q(w, total))).collect();
        let l: Vec<(&str, BigRational)> = LAMBDA_CELLS.iter().map(|&c| (c, q(rng.gen_range(0..=den), den))).collect();
        return PopulationParams::new(&p, &l).expect("valid by construction");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: &[(&str, (i64, i64))], l: &[(&str, (i64, i64))]) -> PopulationParams {
        let p: Vec<_> = p.iter().map(|&(c, (n, d))| (c, q(n, d))).collect();
        let l: Vec<_> = l.iter().map(|&(c, (n, d))| (c, q(n, d))).collect();
        PopulationParams::new(&p, &l).unwrap()
    }

    fn halves() -> Vec<(&'static str, (i64, i64))> {
        LAMBDA_CELLS.iter().map(|&c| (c, (1, 2))).collect()
    }

    #[test]
    fn symmetric_population() {
        let r = ratios_closed_form(&params(&[("xx", (1, 2)), ("yy", (1, 2))], &halves()));
        let one = Ratio::Finite(BigRational::one());
        assert_eq!(r, RatioReport { a_t1: one.clone(), b_t1: one.clone(), a_t2: one.clone(), b_t2: one });
    }

    #[test]
    fn hand_evaluated_ratio() {
        let pp = params(&[("xx", (1, 5)), ("xy", (3, 10)), ("yx", (1, 10)), ("yy", (2, 5))], &halves());
        let r = ratios_closed_form(&pp);
        assert_eq!(r.a_t2, Ratio::Finite(q(2, 3)));
        assert_eq!(r.b_t2, Ratio::Finite(q(2, 3)));
        let sim = simulate_population(&population_from_params(&pp, None).unwrap(), Assignment::Proportional).unwrap();
        assert_eq!(sim.ratios, r);
    }

    #[test]
    fn z_placement_is_irrelevant() {
        let t = Treatments::new();
        for cell in ["xy", "yx"] {
            for first in [true, false] {
                let runs: Vec<_> = (0..3)
                    .map(|k| {
                        let m = template(&t, cell, first, k).unwrap();
                        (m.run_sequence(&[t.grand, t.pair]).unwrap(), m.run_sequence(&[t.pair, t.grand]).unwrap())
                    })
                    .collect();
                assert!(runs.windows(2).all(|w| w[0] == w[1]));
            }
        }
    }

    #[test]
    fn zero_denominators_are_flagged() {
        let r = ratios_closed_form(&params(&[("xx", (1, 1))], &halves()));
        assert_eq!(r.a_t1, Ratio::Infinite);
        assert_eq!(Ratio::of(BigRational::zero(), BigRational::zero()), Ratio::Undefined);
    }

    #[test]
    fn perturbed_counts_are_inconsistent() {
        let pp = params(
            &[("xx", (1, 4)), ("yy", (1, 4)), ("zx", (1, 4)), ("zy", (1, 4))],
            &[("xy", (1, 2)), ("yx", (1, 2)), ("zx", (1, 4)), ("zy", (3, 4))],
        );
        let sim = simulate_population(&population_from_params(&pp, Some(16)).unwrap(), Assignment::Proportional).unwrap();
        let id = identify_from_patterns(&sim.group_a, &sim.group_b).unwrap();
        assert!(id.consistent);
        assert_eq!(id.lambda_zx, Some(q(1, 4)));
        let t = Treatments::new();
        let mut b = sim.group_b.clone();
        b.add(t.a("x"), t.a("x"), 1);
        assert!(!identify_from_patterns(&sim.group_a, &b).unwrap().consistent);
    }
}
