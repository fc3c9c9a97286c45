//! Named models and oracles used by tests, the CLI and the documentation.

use crate::catalog::{Catalog, Frame, Problem, ProblemId};
use crate::frames::AatfModel;
use crate::model::{AatModel, AttentionFunction, Utility};
use crate::oracle::{BehaviorOracle, FnOracle};
use crate::structures::{coarse_max_from_rationale, shortlist_from_rationale, Rationale, SetRationale};
use crate::universe::{Alt, AltSet, Menu, Universe};

fn ranking(u: &Universe, best_to_worst: &[&str]) -> Utility {
    let order: Vec<Alt> = best_to_worst.iter().map(|l| u.alt(l).unwrap()).collect();
    Utility::from_ranking(u, &order).unwrap()
}

fn set(u: &Universe, labels: &[&str]) -> AltSet {
    u.set(labels).unwrap()
}

/// X = {x,y,z,z'}. Γ(A) = {z} when z ∈ A, else {x} when x ∈ A, and
/// Γ({y,z'}) = {y}; u(x) > u(y) > u(z) > u(z'). After ({y,z'}) the DM picks
/// y from the grand set and x from {x,y}: a counterfactual WARP violation.
pub fn late_warp() -> AatModel {
    let u = Universe::new(["x", "y", "z", "z'"]).unwrap();
    let (x, z) = (u.alt("x").unwrap(), u.alt("z").unwrap());
    let gamma = AttentionFunction::from_fn(&u, false, |m: Menu| {
        if m.contains(z) {
            AltSet::singleton(z)
        } else if m.contains(x) {
            AltSet::singleton(x)
        } else {
            set(&u, &["y"])
        }
    })
    .unwrap();
    AatModel::new(ranking(&u, &["x", "y", "z", "z'"]), gamma)
}

/// X = {x,y,z}. Γ(A) = {x} when x ∈ A, Γ({y,z}) = {y};
/// u(z) > u(y) > x. Choices vary with history, but no one-shot choice
/// function ever violates WARP.
pub fn worst_first() -> AatModel {
    let u = Universe::new(["x", "y", "z"]).unwrap();
    let x = u.alt("x").unwrap();
    let gamma = AttentionFunction::from_fn(&u, false, |m: Menu| {
        if m.contains(x) {
            AltSet::singleton(x)
        } else {
            set(&u, &["y"])
        }
    })
    .unwrap();
    AatModel::new(ranking(&u, &["z", "y", "x"]), gamma)
}

/// Full attention over `labels` with utility decreasing along them.
pub fn standard(best_to_worst: &[&str]) -> AatModel {
    let u = Universe::new(best_to_worst.iter().copied()).unwrap();
    AatModel::full_attention(ranking(&u, best_to_worst), &u)
}

/// Items a, b are known; d and e are only noticed when a and b are both
/// missing, e before d. u(d) > u(e) > u(b) > u(a).
pub fn secret_menu() -> AatModel {
    let u = Universe::new(["a", "b", "d", "e"]).unwrap();
    let known = set(&u, &["a", "b"]);
    let gamma = AttentionFunction::from_fn(&u, false, |m: Menu| {
        let k = m.set().intersection(known);
        if k.is_empty() {
            set(&u, &["e"])
        } else {
            k
        }
    })
    .unwrap();
    AatModel::new(ranking(&u, &["d", "e", "b", "a"]), gamma)
}

/// Suppliers a, b, d with the shortlist rationale b→a, b→d and
/// u(a) > u(b) > u(d).
pub fn supplier() -> (AatModel, Rationale) {
    let u = Universe::new(["a", "b", "d"]).unwrap();
    let r = Rationale::from_labels(&u, &[("b", "a"), ("b", "d")]).unwrap();
    let gamma = shortlist_from_rationale(&r).unwrap();
    (AatModel::new(ranking(&u, &["a", "b", "d"]), gamma), r)
}

/// Italian i1, i2 and Mexican m1, m2. Every nonempty set of Italian places
/// shades every nonempty set of Mexican ones. u(m1) > u(i1) > u(m2) > u(i2).
pub fn restaurants() -> (AatModel, SetRationale) {
    let u = Universe::new(["i1", "i2", "m1", "m2"]).unwrap();
    let italian = set(&u, &["i1", "i2"]);
    let mexican = set(&u, &["m1", "m2"]);
    let mut edges = Vec::new();
    for a in italian.subsets().filter(|s| !s.is_empty()) {
        for b in mexican.subsets().filter(|s| !s.is_empty()) {
            edges.push((a, b));
        }
    }
    let r = SetRationale::new(&u, edges).unwrap();
    let gamma = coarse_max_from_rationale(&r).unwrap();
    (AatModel::new(ranking(&u, &["m1", "i1", "m2", "i2"]), gamma), r)
}

/// Two models on {x,y,z} whose switches between x and y need opposite menu
/// orders: the first must see {x,y,z} before {x,y}, the second the reverse.
pub fn opposite_probes() -> (AatModel, AatModel) {
    let u = Universe::new(["x", "y", "z"]).unwrap();
    let build = |grand: &[&str], pair: &[&str]| {
        let gamma = AttentionFunction::from_fn(&u, false, |m: Menu| {
            if m.len() == 3 {
                set(&u, grand)
            } else if m.set() == set(&u, &["x", "y"]) {
                set(&u, pair)
            } else if m.set() == set(&u, &["x", "z"]) {
                set(&u, &["x"])
            } else {
                set(&u, &["z"])
            }
        })
        .unwrap();
        AatModel::new(ranking(&u, &["x", "y", "z"]), gamma)
    };
    (build(&["y"], &["x"]), build(&["x"], &["y"]))
}

/// A boxed oracle closure over problem histories.
pub type BoxedOracle = FnOracle<Box<dyn Fn(&Catalog, &[ProblemId], ProblemId) -> Alt + Send + Sync>>;

fn boxed(
    catalog: Catalog,
    f: impl Fn(&Catalog, &[ProblemId], ProblemId) -> Alt + Send + Sync + 'static,
) -> BoxedOracle {
    FnOracle::new(catalog, Box::new(f))
}

/// Picks `first` from `pair` when that menu appeared an even number of
/// times before, `second` otherwise. Other menus follow `base`.
pub fn alternator(base: AatModel, first: Alt, second: Alt) -> BoxedOracle {
    let cat = base.catalog().clone();
    let pair = AltSet::singleton(first).with(second);
    let pid = cat.first_for(pair).expect("pair is a menu");
    boxed(cat, move |_, h, p| {
        if p == pid {
            if h.iter().filter(|&&q| q == pid).count() % 2 == 0 {
                first
            } else {
                second
            }
        } else {
            base.choose_at(h, p).unwrap()
        }
    })
}

/// Chooses the `(|h| mod |A|)`-th member of `A`.
pub fn cyclic_randomizer(universe: &Universe) -> BoxedOracle {
    let cat = Catalog::frameless(universe, false);
    boxed(cat, |cat, h, p| {
        let m = cat.mask(p);
        m.iter().nth(h.len() % m.len()).unwrap()
    })
}

/// `base` with an x-on-top order, except that after ({x,y}) every menu
/// containing {x,y,z} yields y. Running ({x,y},{x,y,z},{x,y}) flips to y and
/// back to x.
pub fn flip_flop(base: AatModel, x: Alt, y: Alt, z: Alt) -> BoxedOracle {
    let cat = base.catalog().clone();
    let xy = cat.first_for(AltSet::singleton(x).with(y)).expect("pair is a menu");
    let xyz = AltSet::singleton(x).with(y).with(z);
    boxed(cat, move |cat, h, p| {
        if h == [xy] && xyz.is_subset(cat.mask(p)) {
            y
        } else {
            base.choose_at(h, p).unwrap()
        }
    })
}

/// `base` with one answer changed: after the single-menu history `(b2)`,
/// the choice from `d` becomes `b`. Chosen when another history `(b1)` ends
/// with the same chosen set, so histories with equal chosen sets disagree.
pub fn history_splitter(base: AatModel) -> Option<BoxedOracle> {
    let cat = base.catalog().clone();
    let c0: Vec<Alt> = cat.ids().map(|p| base.choose_at(&[], p).unwrap()).collect();
    let (b2, w) = cat.ids().find_map(|p2| {
        cat.ids()
            .take_while(|&p1| p1 < p2)
            .find(|&p1| c0[p1.index()] == c0[p2.index()])
            .map(|_| (p2, c0[p2.index()]))
    })?;
    let (d, b) = cat.ids().find_map(|d| {
        let a = base.choose_at(&[b2], d).unwrap();
        let keep = AltSet::singleton(a).with(c0[d.index()]).with(w);
        cat.mask(d).difference(keep).first().map(|b| (d, b))
    })?;
    Some(boxed(cat, move |_, h, p| {
        if h == [b2] && p == d {
            b
        } else {
            base.choose_at(h, p).unwrap()
        }
    }))
}

fn framed_model(
    u: &Universe,
    utility: Utility,
    problems: Vec<(Menu, Frame)>,
    mut gamma: impl FnMut(Menu, &Frame) -> AltSet,
) -> AatfModel {
    let problems: Vec<Problem> = problems
        .into_iter()
        .map(|(menu, f)| Problem { menu, frame: Some(f) })
        .collect();
    let cat = Catalog::framed(u, problems).unwrap();
    AatfModel::from_fn(utility, cat, |p| gamma(p.menu, p.frame.as_ref().unwrap())).unwrap()
}

/// A framed model with one "alert" presentation of the grand set.
pub struct AlertFrame {
    pub model: AatfModel,
    pub alert: ProblemId,
    pub target: Alt,
}

/// X = {x,y,z}, every menu under a "plain" frame and {x,y,z} also under
/// "alert", which is meant to get x chosen.
///
/// With `success`, u(x) > u(y) > u(z) and the alert puts {x,z} in view, so
/// x is chosen and stays considered. Without it, u(y) > u(x) > u(z), the
/// alert shows {x,y}, y wins, and x drops out of view in plain {x,z}.
pub fn alert_frame(success: bool) -> AlertFrame {
    let u = Universe::new(["x", "y", "z"]).unwrap();
    let utility = if success {
        ranking(&u, &["x", "y", "z"])
    } else {
        ranking(&u, &["y", "x", "z"])
    };
    let plain = Frame::Generic("plain".into());
    let alert = Frame::Generic("alert".into());
    let grand = u.menu(&["x", "y", "z"]).unwrap();
    let mut problems: Vec<(Menu, Frame)> = u.menus(false).into_iter().map(|m| (m, plain.clone())).collect();
    problems.push((grand, alert.clone()));
    let z = u.alt("z").unwrap();
    let alert_view = if success { set(&u, &["x", "z"]) } else { set(&u, &["x", "y"]) };
    let model = framed_model(&u, utility, problems, |m, f| {
        if *f == alert {
            alert_view
        } else if m.contains(z) {
            AltSet::singleton(z)
        } else {
            m.set()
        }
    });
    let alert = model.catalog().find(grand, Some(&alert)).unwrap();
    AlertFrame {
        model,
        alert,
        target: u.alt("x").unwrap(),
    }
}

/// X = {a,b,n1,n2} with u(a) > u(b) > n1 > n2. In the usual selection only
/// the n's are seen when present and {a,b} shows just b; a friend's
/// introduction of {a,b} puts a in view. Once a is hired and then gone, b
/// is never looked at again.
pub fn hidden_talent() -> AatfModel {
    let u = Universe::new(["a", "b", "n1", "n2"]).unwrap();
    let plain = Frame::Generic("plain".into());
    let friend = Frame::Generic("friend".into());
    let ab = u.menu(&["a", "b"]).unwrap();
    let mut problems: Vec<(Menu, Frame)> = u.menus(false).into_iter().map(|m| (m, plain.clone())).collect();
    problems.push((ab, friend.clone()));
    let ns = set(&u, &["n1", "n2"]);
    let b = set(&u, &["b"]);
    framed_model(&u, ranking(&u, &["a", "b", "n1", "n2"]), problems, |m, f| {
        if *f == friend {
            m.set()
        } else if !m.set().intersection(ns).is_empty() {
            m.set().intersection(ns)
        } else if m.set() == ab.set() {
            b
        } else {
            m.set()
        }
    })
}

/// Four diaper brands listed in label order; the DM looks at the top three
/// entries. u(d3) > u(d4) > u(d1) > u(d2). The grand set also appears as the
/// list d2, d4, d1, d3.
pub fn diapers() -> AatfModel {
    let u = Universe::new(["d1", "d2", "d3", "d4"]).unwrap();
    let mut problems: Vec<(Menu, Frame)> = u
        .menus(false)
        .into_iter()
        .map(|m| (m, Frame::List(m.iter().collect())))
        .collect();
    let reshuffled: Vec<Alt> = ["d2", "d4", "d1", "d3"].iter().map(|l| u.alt(l).unwrap()).collect();
    problems.push((u.menu(&["d1", "d2", "d3", "d4"]).unwrap(), Frame::List(reshuffled)));
    framed_model(&u, ranking(&u, &["d3", "d4", "d1", "d2"]), problems, |_, f| match f {
        Frame::List(order) => AltSet::from_alts(order.iter().take(3).copied()),
        _ => unreachable!(),
    })
}

/// X = {a,b,c} with recommendation frames and u(a) > u(b) > u(c). Facing
/// {a,b} with a recommended, the DM overlooks a; with b recommended, both are
/// seen. Other menus carry an empty recommendation and full attention.
pub fn unsought_advice() -> AatfModel {
    let u = Universe::new(["a", "b", "c"]).unwrap();
    let ab = u.menu(&["a", "b"]).unwrap();
    let (ra, rb) = (Frame::Rec(set(&u, &["a"])), Frame::Rec(set(&u, &["b"])));
    let mut problems: Vec<(Menu, Frame)> = u
        .menus(false)
        .into_iter()
        .filter(|&m| m != ab)
        .map(|m| (m, Frame::Rec(AltSet::EMPTY)))
        .collect();
    problems.push((ab, ra.clone()));
    problems.push((ab, rb));
    let b = set(&u, &["b"]);
    framed_model(&u, ranking(&u, &["a", "b", "c"]), problems, |m, f| if *f == ra { b } else { m.set() })
}
