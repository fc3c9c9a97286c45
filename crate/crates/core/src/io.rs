//! JSON reading and writing. Parse errors name the offending location, as
//! in `observations[1].choices[0]`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::catalog::{Catalog, Frame, Problem, ProblemId};
use crate::compat::{ChoiceClass, ChoiceFunction};
use crate::error::AatError;
use crate::frames::AatfModel;
use crate::model::{parse_rational, AatModel, AttentionFunction, Utility};
use crate::oracle::{ChoiceDataset, Observation};
use crate::popsim::PopulationParams;
use crate::structures::{Rationale, SetRationale};
use crate::universe::{Alt, AltSet, Menu, Universe};

/// `{"exact": "p/q", "decimal": f}`.
pub fn rational_json(r: &BigRational) -> Value {
    json!({"exact": r.to_string(), "decimal": r.to_f64()})
}

pub fn frame_json(u: &Universe, f: &Frame) -> Value {
    match f {
        Frame::Generic(tag) => json!({"kind": "generic", "tag": tag}),
        Frame::List(order) => json!({"kind": "list", "order": order.iter().map(|&a| u.label(a)).collect::<Vec<_>>()}),
        Frame::Rec(s) => json!({"kind": "rec", "set": u.set_labels(*s)}),
    }
}

/// A plain menu as a label list; a framed one as `{"menu", "frame"}`.
pub fn problem_json(catalog: &Catalog, p: ProblemId) -> Value {
    let u = catalog.universe();
    let prob = catalog.problem(p);
    let menu = u.set_labels(prob.menu.set());
    match &prob.frame {
        None => json!(menu),
        Some(f) => json!({"menu": menu, "frame": frame_json(u, f)}),
    }
}

pub fn utility_json(u: &Universe, utility: &Utility) -> Value {
    Value::Object(
        u.alts()
            .map(|a| (u.label(a).to_string(), Value::String(utility.value(a).to_string())))
            .collect(),
    )
}

pub fn model_json(model: &AatModel) -> Value {
    let u = model.universe();
    json!({
        "alternatives": u.labels(),
        "utility": utility_json(u, model.utility()),
        "gamma": Value::Object(
            model.gamma().iter()
                .map(|(m, g)| (u.menu_key(m), json!(u.set_labels(g))))
                .collect::<Map<_, _>>()
        ),
    })
}

pub fn framed_model_json(model: &AatfModel) -> Value {
    let u = model.universe();
    let cat = model.catalog();
    json!({
        "alternatives": u.labels(),
        "utility": utility_json(u, model.utility()),
        "problems": cat.ids().map(|p| {
            let prob = cat.problem(p);
            json!({
                "menu": u.set_labels(prob.menu.set()),
                "frame": frame_json(u, prob.frame.as_ref().expect("framed catalog")),
                "gamma": u.set_labels(model.gamma(p)),
            })
        }).collect::<Vec<_>>(),
    })
}

/// A JSON value together with its location in the document.
#[derive(Clone, Copy)]
struct At<'a> {
    v: &'a Value,
    path: &'a str,
}

fn err(path: &str, msg: impl std::fmt::Display) -> AatError {
    let at = if path.is_empty() { "(top level)" } else { path };
    AatError::Format(format!("{at}: {msg}"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl<'a> At<'a> {
    fn object(self) -> Result<&'a Map<String, Value>, AatError> {
        self.v.as_object().ok_or_else(|| err(self.path, "expected an object"))
    }

    fn array(self) -> Result<&'a Vec<Value>, AatError> {
        self.v.as_array().ok_or_else(|| err(self.path, "expected an array"))
    }

    fn str(self) -> Result<&'a str, AatError> {
        self.v.as_str().ok_or_else(|| err(self.path, "expected a string"))
    }

    fn get(self, key: &str) -> Option<&'a Value> {
        self.v.as_object().and_then(|o| o.get(key))
    }

    fn rational(self) -> Result<BigRational, AatError> {
        let s = match self.v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(err(self.path, "expected a rational number such as \"3/4\"")),
        };
        parse_rational(&s).map_err(|e| err(self.path, e))
    }
}

/// Calls `f` on a required field.
fn field<T>(at: At<'_>, key: &str, f: impl FnOnce(At<'_>) -> Result<T, AatError>) -> Result<T, AatError> {
    at.object()?;
    let p = join(at.path, key);
    match at.get(key) {
        Some(v) => f(At { v, path: &p }),
        None => Err(err(at.path, format!("missing field `{key}`"))),
    }
}

fn opt_field<T>(at: At<'_>, key: &str, f: impl FnOnce(At<'_>) -> Result<T, AatError>) -> Result<Option<T>, AatError> {
    let p = join(at.path, key);
    match at.get(key) {
        Some(v) => f(At { v, path: &p }).map(Some),
        None => Ok(None),
    }
}

fn items<T>(at: At<'_>, mut f: impl FnMut(usize, At<'_>) -> Result<T, AatError>) -> Result<Vec<T>, AatError> {
    at.array()?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let p = format!("{}[{i}]", at.path);
            f(i, At { v, path: &p })
        })
        .collect()
}

fn entries<T>(at: At<'_>, mut f: impl FnMut(&str, At<'_>) -> Result<T, AatError>) -> Result<Vec<T>, AatError> {
    at.object()?
        .iter()
        .map(|(k, v)| {
            let p = join(at.path, k);
            f(k, At { v, path: &p })
        })
        .collect()
}

fn alt(u: &Universe, at: At<'_>) -> Result<Alt, AatError> {
    u.alt(at.str()?).map_err(|e| err(at.path, e))
}

fn alt_list(u: &Universe, at: At<'_>) -> Result<Vec<Alt>, AatError> {
    items(at, |_, a| alt(u, a))
}

fn alt_set(u: &Universe, at: At<'_>) -> Result<AltSet, AatError> {
    Ok(AltSet::from_alts(alt_list(u, at)?))
}

fn menu(u: &Universe, at: At<'_>) -> Result<Menu, AatError> {
    let s = alt_set(u, at)?;
    u.menu_from_set(s, false).map_err(|e| err(at.path, e))
}

fn key_set(u: &Universe, key: &str, path: &str) -> Result<AltSet, AatError> {
    u.parse_key(key).map_err(|e| err(path, e))
}

fn labels(at: At<'_>) -> Result<Vec<String>, AatError> {
    items(at, |_, a| a.str().map(str::to_string))
}

fn universe_field(at: At<'_>) -> Result<Universe, AatError> {
    field(at, "alternatives", |a| {
        Universe::new(labels(a)?).map_err(|e| err(a.path, e))
    })
}

/// Either `{"alt": value}` or a ranking, best first.
fn utility(u: &Universe, at: At<'_>) -> Result<Utility, AatError> {
    if at.v.is_array() {
        let order = alt_list(u, at)?;
        return Utility::from_ranking(u, &order).map_err(|e| err(at.path, e));
    }
    let mut values: Vec<Option<BigRational>> = vec![None; u.len()];
    entries(at, |k, v| {
        let a = u.alt(k).map_err(|e| err(v.path, e))?;
        values[a.index()] = Some(v.rational()?);
        Ok(())
    })?;
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| err(at.path, format!("no utility for `{}`", u.label(Alt::from_index(i))))))
        .collect::<Result<Vec<_>, _>>()?;
    Utility::new(u, values).map_err(|e| err(at.path, e))
}

pub fn parse_frame(u: &Universe, at_v: &Value, path: &str) -> Result<Frame, AatError> {
    let at = At { v: at_v, path };
    let kind = field(at, "kind", |k| k.str().map(str::to_string))?;
    match kind.as_str() {
        "generic" => field(at, "tag", |t| Ok(Frame::Generic(t.str()?.to_string()))),
        "list" => field(at, "order", |o| Ok(Frame::List(alt_list(u, o)?))),
        "rec" => field(at, "set", |s| Ok(Frame::Rec(alt_set(u, s)?))),
        other => Err(err(&join(path, "kind"), format!("unknown frame kind `{other}`"))),
    }
}

fn problem(u: &Universe, at: At<'_>) -> Result<Problem, AatError> {
    if at.v.is_array() {
        return Ok(Problem {
            menu: menu(u, at)?,
            frame: None,
        });
    }
    let m = field(at, "menu", |m| menu(u, m))?;
    let frame = field(at, "frame", |f| parse_frame(u, f.v, f.path))?;
    Ok(Problem {
        menu: m,
        frame: Some(frame),
    })
}

/// `{"alternatives", "utility", "gamma"}`. Without `gamma` attention is full.
pub fn parse_model(v: &Value) -> Result<AatModel, AatError> {
    let at = At { v, path: "" };
    let u = universe_field(at)?;
    let utility = field(at, "utility", |a| utility(&u, a))?;
    let gamma = opt_field(at, "gamma", |g| {
        let mut map = BTreeMap::new();
        entries(g, |k, s| {
            let m = u.menu_from_set(key_set(&u, k, s.path)?, false).map_err(|e| err(s.path, e))?;
            map.insert(m, alt_set(&u, s)?);
            Ok(())
        })?;
        AttentionFunction::from_map(&u, false, &map).map_err(|e| err(g.path, e))
    })?
    .unwrap_or_else(|| AttentionFunction::full(&u));
    Ok(AatModel::new(utility, gamma))
}

/// `{"alternatives", "utility", "problems": [{"menu", "frame", "gamma"}]}`.
pub fn parse_framed_model(v: &Value) -> Result<AatfModel, AatError> {
    let at = At { v, path: "" };
    let u = universe_field(at)?;
    let utility = field(at, "utility", |a| utility(&u, a))?;
    let rows = field(at, "problems", |ps| {
        items(ps, |_, p| {
            let prob = problem(&u, p)?;
            if prob.frame.is_none() {
                return Err(err(p.path, "framed problems need a frame"));
            }
            let g = opt_field(p, "gamma", |g| alt_set(&u, g))?.unwrap_or(prob.menu.set());
            Ok((prob, g))
        })
    })?;
    let cat = Catalog::framed(&u, rows.iter().map(|(p, _)| p.clone()).collect()).map_err(|e| err("problems", e))?;
    let lookup: BTreeMap<Problem, AltSet> = rows.into_iter().collect();
    AatfModel::from_fn(utility, cat, |p| lookup[p]).map_err(|e| err("problems", e))
}

/// `{"alternatives"?, "observations": [{"menus", "choices"}]}`. Without
/// `alternatives` the universe is every label that appears.
pub fn parse_dataset(v: &Value) -> Result<ChoiceDataset, AatError> {
    let at = At { v, path: "" };
    let u = match at.get("alternatives") {
        Some(_) => universe_field(at)?,
        None => {
            let mut seen = std::collections::BTreeSet::new();
            collect_labels(v.get("observations").unwrap_or(&Value::Null), &mut seen);
            Universe::new(seen).map_err(|e| err("observations", e))?
        }
    };
    let observations = field(at, "observations", |obs| {
        items(obs, |_, o| {
            let problems = field(o, "menus", |ms| items(ms, |_, m| problem(&u, m)))?;
            let choices = field(o, "choices", |cs| alt_list(&u, cs))?;
            if choices.len() != problems.len() {
                return Err(err(o.path, format!("{} menus but {} choices", problems.len(), choices.len())));
            }
            for (t, (p, &c)) in problems.iter().zip(&choices).enumerate() {
                if !p.menu.contains(c) {
                    return Err(err(
                        &format!("{}.choices[{t}]", o.path),
                        format!("`{}` is not in the menu it was chosen from", u.label(c)),
                    ));
                }
            }
            Ok(Observation { problems, choices })
        })
    })?;
    ChoiceDataset::new(u, observations)
}

fn collect_labels(v: &Value, out: &mut std::collections::BTreeSet<String>) {
    match v {
        Value::String(s) => {
            out.insert(s.clone());
        }
        Value::Array(a) => a.iter().for_each(|x| collect_labels(x, out)),
        Value::Object(o) => {
            for (k, x) in o {
                if k != "frame" || !x.is_object() {
                    collect_labels(x, out);
                } else if let Some(f) = x.as_object() {
                    // Frame tags are not alternatives.
                    for (fk, fv) in f {
                        if fk != "kind" && fk != "tag" {
                            collect_labels(fv, out);
                        }
                    }
                }
            }
        }
        _ => {}
    }
}

pub fn dataset_json(d: &ChoiceDataset) -> Value {
    let u = d.universe();
    json!({
        "alternatives": u.labels(),
        "observations": d.observations().iter().map(|o| json!({
            "menus": o.problems.iter().map(|p| {
                let m = u.set_labels(p.menu.set());
                match &p.frame {
                    None => json!(m),
                    Some(f) => json!({"menu": m, "frame": frame_json(u, f)}),
                }
            }).collect::<Vec<_>>(),
            "choices": o.choices.iter().map(|&c| u.label(c)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

/// A class is `{"alternatives", "members": [table, ...]}` or a bare array
/// of tables. A table maps `"x|y"` keys to the chosen label; singletons are
/// implicit.
pub fn parse_class(v: &Value) -> Result<ChoiceClass, AatError> {
    let at = At { v, path: "" };
    let (u, members_at) = if v.is_array() {
        let mut seen = std::collections::BTreeSet::new();
        for t in v.as_array().unwrap() {
            if let Some(o) = t.as_object() {
                for k in o.keys() {
                    seen.extend(k.split('|').map(str::to_string));
                }
            }
        }
        (Universe::new(seen).map_err(|e| err("", e))?, at)
    } else {
        let members = at.get("members").ok_or_else(|| err("", "missing field `members`"))?;
        (universe_field(at)?, At { v: members, path: "members" })
    };
    let members = items(members_at, |_, t| {
        let mut table = BTreeMap::new();
        entries(t, |k, c| {
            table.insert(key_set(&u, k, c.path)?, (alt(&u, c)?, c.path.to_string()));
            Ok(())
        })?;
        for s in u.all().subsets().filter(|s| s.len() >= 2) {
            match table.get(&s) {
                None => return Err(err(t.path, format!("no choice for {}", u.set_key(s)))),
                Some((a, p)) if !s.contains(*a) => {
                    return Err(err(p, format!("`{}` is not in {}", u.label(*a), u.set_key(s))))
                }
                _ => {}
            }
        }
        ChoiceFunction::new(&u, |s| if s.len() == 1 { s.first().unwrap() } else { table[&s].0 })
            .map_err(|e| err(t.path, e))
    })?;
    ChoiceClass::new(&u, members).map_err(|e| err(members_at.path, e))
}

pub fn class_json(c: &ChoiceClass) -> Value {
    let u = c.universe();
    json!({
        "alternatives": u.labels(),
        "members": c.members().iter().map(|f| f.to_json(u)).collect::<Vec<_>>(),
    })
}

/// A rationale on single alternatives or on sets.
#[derive(Clone, Debug)]
pub enum AnyRationale {
    Binary(Rationale),
    Sets(SetRationale),
}

/// `{"alternatives", "edges": [["b","a"], ...]}` for a binary rationale,
/// `{"alternatives", "edges": [[["i1"],["m1","m2"]], ...]}` for sets.
pub fn parse_rationale(v: &Value) -> Result<AnyRationale, AatError> {
    let at = At { v, path: "" };
    let u = universe_field(at)?;
    let sets = v
        .get("edges")
        .and_then(Value::as_array)
        .and_then(|e| e.first())
        .and_then(Value::as_array)
        .and_then(|e| e.first())
        .is_some_and(Value::is_array);
    field(at, "edges", |es| {
        if sets {
            let edges = items(es, |_, e| {
                let pair = e.array()?;
                if pair.len() != 2 {
                    return Err(err(e.path, "an edge is a pair of sets"));
                }
                let d = alt_set(&u, At { v: &pair[0], path: &format!("{}[0]", e.path) })?;
                let f = alt_set(&u, At { v: &pair[1], path: &format!("{}[1]", e.path) })?;
                Ok((d, f))
            })?;
            SetRationale::new(&u, edges).map(AnyRationale::Sets).map_err(|e| err(es.path, e))
        } else {
            let edges = items(es, |_, e| {
                let pair = alt_list(&u, e)?;
                if pair.len() != 2 {
                    return Err(err(e.path, "an edge is a pair of alternatives"));
                }
                Ok((pair[0], pair[1]))
            })?;
            Rationale::new(&u, edges).map(AnyRationale::Binary).map_err(|e| err(es.path, e))
        }
    })
}

/// `{"P": {"xx": "1/5", ...}, "lambda": {"xy": "1/2", ...}}`.
pub fn parse_params(v: &Value) -> Result<PopulationParams, AatError> {
    let at = At { v, path: "" };
    let read = |key: &str| {
        field(at, key, |m| entries(m, |k, r| Ok((k.to_string(), r.rational()?))))
    };
    let p = read("P")?;
    let l = read("lambda")?;
    let p: Vec<(&str, BigRational)> = p.iter().map(|(k, r)| (k.as_str(), r.clone())).collect();
    let l: Vec<(&str, BigRational)> = l.iter().map(|(k, r)| (k.as_str(), r.clone())).collect();
    PopulationParams::new(&p, &l)
}

/// Reads a menu list like `[["x","y"],["x","y","z"]]` against a universe.
pub fn parse_menus(u: &Universe, v: &Value, path: &str) -> Result<Vec<Menu>, AatError> {
    items(At { v, path }, |_, m| menu(u, m))
}

/// Reads a problem list against a catalog, framed or not.
pub fn parse_problems(catalog: &Catalog, v: &Value, path: &str) -> Result<Vec<ProblemId>, AatError> {
    let u = catalog.universe();
    items(At { v, path }, |_, p| {
        let prob = problem(u, p)?;
        catalog
            .find(prob.menu, prob.frame.as_ref())
            .ok_or_else(|| err(p.path, "no such problem in the model"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn model_round_trip() {
        let m = fixtures::late_warp();
        let back = parse_model(&model_json(&m)).unwrap();
        assert_eq!(model_json(&back), model_json(&m));
    }

    #[test]
    fn framed_round_trip() {
        let m = fixtures::diapers();
        let back = parse_framed_model(&framed_model_json(&m)).unwrap();
        assert_eq!(framed_model_json(&back), framed_model_json(&m));
    }

    #[test]
    fn dataset_errors_name_the_location() {
        let v = json!({"observations": [
            {"menus": [["x","y"]], "choices": ["x"]},
            {"menus": [["x","y"]], "choices": ["q"]},
        ]});
        let e = parse_dataset(&v).unwrap_err().to_string();
        assert!(e.contains("observations[1].choices[0]"), "{e}");
        let mut v = v;
        v["alternatives"] = json!(["x", "y"]);
        let e = parse_dataset(&v).unwrap_err().to_string();
        assert!(e.contains("observations[1].choices[0]") && e.contains("unknown"), "{e}");
    }

    #[test]
    fn class_from_bare_array() {
        let v = json!([{"x|y": "x"}, {"x|y": "y"}]);
        assert_eq!(parse_class(&v).unwrap().len(), 2);
        let bad = json!([{"x|y": "z"}]);
        assert!(parse_class(&bad).is_err());
    }

    #[test]
    fn params_accept_decimals() {
        let v = json!({"P": {"xx": "0.5", "yy": "1/2"}, "lambda": {"xy": 0.5, "yx": "1/2", "zx": "0", "zy": "1"}});
        assert!(parse_params(&v).is_ok());
    }
}
