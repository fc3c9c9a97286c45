//! `aat`: batch front end for aat-core. Every command prints one JSON (or
//! markdown) report with the tool version, horizon and input digests.
//!
//! Exit codes: 0 when everything checked passes, 1 when a violation or a
//! negative verdict is reported, 2 on input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aat_core::axioms;
use aat_core::compat;
use aat_core::frames::{self, AatfModel};
use aat_core::identify;
use aat_core::io;
use aat_core::oracle::{oracle_from_dataset, DatasetOracle};
use aat_core::popsim::{self, Assignment};
use aat_core::represent;
use aat_core::structures;
use aat_core::{AatError, AatModel, BehaviorOracle, ChoiceDataset, ChoiceTree, Frame, Universe, VerdictReport, DEFAULT_HORIZON};
use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Longest list printed in full; longer lists are cut and counted.
const LIST_LIMIT: usize = 50;

#[derive(Parser)]
#[command(name = "aat", version, about = "Check, identify and construct attention-across-time choice models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Menu-sequence length explored by bounded checks.
    #[arg(long, global = true, default_value_t = DEFAULT_HORIZON)]
    horizon: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Alternatives, comma separated. Fixes a dataset's universe; must match
    /// a model's.
    #[arg(long, global = true, value_delimiter = ',')]
    universe: Option<Vec<String>>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Markdown,
}

#[derive(Args, Clone)]
struct Source {
    /// Model JSON, plain or framed.
    #[arg(long, conflicts_with = "dataset", required_unless_present = "dataset")]
    model: Option<PathBuf>,
    /// Dataset JSON of observed sequences.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a model on a menu sequence.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// JSON array of menus (or framed problems), inline or as a file.
        #[arg(long)]
        sequence: String,
    },
    /// Weak Stability, Past Dependence, Default Attention, the standard-model
    /// axioms and a WARP violation census.
    CheckAxioms(Source),
    /// Revealed relations and the preference order on ever-chosen
    /// alternatives.
    Infer(Source),
    /// Lower and upper bounds on attention.
    Bounds(Source),
    /// Structure recognizers and representability checks for a plain model.
    Structures {
        #[arg(long)]
        model: PathBuf,
        /// Rationale JSON to revise along `--history`.
        #[arg(long)]
        rationale: Option<PathBuf>,
        /// JSON array of menus faced before the revision.
        #[arg(long)]
        history: Option<String>,
    },
    /// WARP-convexity and compatibility of a finite class.
    Compat {
        #[arg(long)]
        class: PathBuf,
    },
    /// Frame axioms and structured constructions for a framed model.
    Frames {
        #[arg(long)]
        model: PathBuf,
        /// A framed problem to study as an intervention, inline JSON.
        #[arg(long, requires = "target")]
        effect: Option<String>,
        /// The alternative the intervention is meant to promote.
        #[arg(long)]
        target: Option<String>,
    },
    /// Closed-form and simulated population ratios with identification.
    Popsim {
        #[arg(long)]
        params: PathBuf,
        /// Population size; defaults to the smallest exact one.
        #[arg(long)]
        population: Option<u64>,
        /// Also run a seeded random assignment.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Build and verify a representation.
    Construct(Source),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::CheckAxioms(_) => "check-axioms",
            Command::Infer(_) => "infer",
            Command::Bounds(_) => "bounds",
            Command::Structures { .. } => "structures",
            Command::Compat { .. } => "compat",
            Command::Frames { .. } => "frames",
            Command::Popsim { .. } => "popsim",
            Command::Construct(_) => "construct",
        }
    }
}

struct Outcome {
    result: Value,
    ok: bool,
}

struct Ctx {
    horizon: usize,
    universe: Option<Vec<String>>,
    inputs: Vec<Value>,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> anyhow::Result<Value> {
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.inputs.push(json!({
            "path": path.display().to_string(),
            "sha256": hex::encode(Sha256::digest(&bytes)),
        }));
        let v = serde_json::from_slice(&bytes).with_context(|| format!("{}: malformed JSON", path.display()))?;
        Ok(v)
    }

    fn located<T>(path: &Path, r: Result<T, AatError>) -> anyhow::Result<T> {
        r.map_err(|e| anyhow!("{}: {e}", path.display()))
    }

    fn check_universe(&self, path: &Path, u: &Universe) -> anyhow::Result<()> {
        match &self.universe {
            Some(want) => {
                let want = Ctx::located(path, Universe::new(want.iter().cloned()))?;
                if &want != u {
                    return Err(anyhow!(
                        "{}: --universe differs from the model's alternatives {:?}",
                        path.display(),
                        u.labels()
                    ));
                }
                Ok(())
            }
            None => Ok(()),
        }
    }

    fn plain_model(&mut self, path: &Path) -> anyhow::Result<AatModel> {
        let v = self.read(path)?;
        let m = Ctx::located(path, io::parse_model(&v))?;
        self.check_universe(path, m.universe())?;
        Ok(m)
    }

    fn framed_model(&mut self, path: &Path) -> anyhow::Result<AatfModel> {
        let v = self.read(path)?;
        let m = Ctx::located(path, io::parse_framed_model(&v))?;
        self.check_universe(path, m.universe())?;
        Ok(m)
    }

    fn dataset(&mut self, path: &Path) -> anyhow::Result<(ChoiceDataset, DatasetOracle)> {
        let mut v = self.read(path)?;
        if let (Some(labels), Some(o)) = (&self.universe, v.as_object_mut()) {
            o.insert("alternatives".into(), json!(labels));
        }
        let d = Ctx::located(path, io::parse_dataset(&v))?;
        let o = Ctx::located(path, oracle_from_dataset(&d))?;
        Ok((d, o))
    }

    fn source(&mut self, s: &Source) -> anyhow::Result<Loaded> {
        if let Some(p) = &s.model {
            let v = self.read(p)?;
            let loaded = if v.get("problems").is_some() {
                Loaded::Framed(Ctx::located(p, io::parse_framed_model(&v))?)
            } else {
                Loaded::Plain(Ctx::located(p, io::parse_model(&v))?)
            };
            self.check_universe(p, loaded.oracle().catalog().universe())?;
            Ok(loaded)
        } else {
            let p = s.dataset.as_ref().expect("clap requires one source");
            let (_, o) = self.dataset(p)?;
            Ok(Loaded::Dataset(o))
        }
    }

    fn tree(&self, o: &dyn BehaviorOracle) -> anyhow::Result<ChoiceTree> {
        Ok(ChoiceTree::explore(o, self.horizon)?)
    }
}

enum Loaded {
    Plain(AatModel),
    Framed(AatfModel),
    Dataset(DatasetOracle),
}

impl Loaded {
    fn oracle(&self) -> &dyn BehaviorOracle {
        match self {
            Loaded::Plain(m) => m,
            Loaded::Framed(m) => m,
            Loaded::Dataset(d) => d,
        }
    }

    fn is_dataset(&self) -> bool {
        matches!(self, Loaded::Dataset(_))
    }
}

/// Cuts a list to `LIST_LIMIT` entries and says how many there were.
fn truncated(items: Vec<Value>) -> Value {
    let total = items.len();
    let shown: Vec<Value> = items.into_iter().take(LIST_LIMIT).collect();
    json!({"total": total, "shown": shown.len(), "items": shown})
}

fn verdicts(reports: &[VerdictReport], tree: &ChoiceTree) -> Value {
    reports.iter().map(|r| r.to_json(tree.catalog())).collect()
}

fn simulate(ctx: &mut Ctx, model: &Path, sequence: &str) -> anyhow::Result<Outcome> {
    let v = ctx.read(model)?;
    let oracle: Box<dyn BehaviorOracle> = if v.get("problems").is_some() {
        Box::new(Ctx::located(model, io::parse_framed_model(&v))?)
    } else {
        Box::new(Ctx::located(model, io::parse_model(&v))?)
    };
    let seq_v: Value = if sequence.trim_start().starts_with('[') {
        serde_json::from_str(sequence).context("--sequence: malformed JSON")?
    } else {
        let p = PathBuf::from(sequence);
        ctx.read(&p)?
    };
    let cat = oracle.catalog();
    let problems = io::parse_problems(cat, &seq_v, "sequence").map_err(|e| anyhow!("{e}"))?;
    let engine = oracle.engine().expect("models carry an engine");
    let u = cat.universe();
    let mut chosen = aat_core::AltSet::EMPTY;
    let mut periods = Vec::new();
    for (t, &p) in problems.iter().enumerate() {
        let considered = engine.consider(chosen, p);
        let c = engine.step(chosen, p);
        chosen = chosen.with(c);
        periods.push(json!({
            "period": t + 1,
            "menu": io::problem_json(cat, p),
            "considered": u.set_labels(considered),
            "choice": u.label(c),
            "chosen_so_far": u.set_labels(chosen),
        }));
    }
    Ok(Outcome {
        result: json!({"periods": periods}),
        ok: true,
    })
}

fn check_axioms(ctx: &mut Ctx, s: &Source) -> anyhow::Result<Outcome> {
    let loaded = ctx.source(s)?;
    let tree = ctx.tree(loaded.oracle())?;
    let core = axioms::check_axioms(&tree);
    let standard = [axioms::full_stability(&tree), axioms::past_independence(&tree)];
    let census: Vec<Value> = axioms::classify_violations(&tree).iter().map(|r| r.to_json(tree.catalog())).collect();
    let ok = core.iter().all(|r| !r.violated());
    Ok(Outcome {
        result: json!({
            "source": if loaded.is_dataset() { "dataset" } else { "model" },
            "tree_complete": tree.is_complete(),
            "axioms": verdicts(&core, &tree),
            "aat_consistent": if !ok { "violated" } else if core.iter().all(VerdictReport::passed) { "pass" } else { "not-falsified" },
            "standard_model": verdicts(&standard, &tree),
            "warp_violations": truncated(census),
        }),
        ok,
    })
}

fn infer(ctx: &mut Ctx, s: &Source) -> anyhow::Result<Outcome> {
    let loaded = ctx.source(s)?;
    let tree = ctx.tree(loaded.oracle())?;
    let cat = tree.catalog();
    let u = cat.universe();
    let (sw, p) = identify::reveal(&tree);
    let mut result = json!({
        "switches": truncated(as_items(sw.to_json(cat))),
        "revealed_preference": truncated(as_items(p.to_json(cat))),
    });
    let mut ok = true;
    match identify::infer_preference_tree(&tree) {
        Ok(pref) => {
            result["preference"] = pref.to_json(u);
            if let Ok(gap) = identify::counterfactual_gap_tree(&tree) {
                result["counterfactual_gap"] = json!({
                    "default_order": labels(u, &gap.default_order),
                    "utility_order": labels(u, &gap.utility_order),
                    "triple": gap.triple.map(|(z, x, y)| labels(u, &[z, x, y])),
                });
            }
        }
        Err(AatError::NotAat(r)) => {
            ok = false;
            result["preference"] = Value::Null;
            result["violation"] = r.to_json(cat);
        }
        Err(e @ (AatError::Undecided(_) | AatError::Cyclic(_))) => {
            // Datasets rarely decide every pair; the relations above stand.
            ok = !matches!(e, AatError::Cyclic(_));
            result["preference"] = Value::Null;
            result["partial"] = json!(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    Ok(Outcome { result, ok })
}

fn as_items(v: Value) -> Vec<Value> {
    match v {
        Value::Array(a) => a,
        other => vec![other],
    }
}

fn labels(u: &Universe, v: &[aat_core::Alt]) -> Vec<String> {
    v.iter().map(|&a| u.label(a).to_string()).collect()
}

fn bounds(ctx: &mut Ctx, s: &Source) -> anyhow::Result<Outcome> {
    let loaded = ctx.source(s)?;
    let tree = ctx.tree(loaded.oracle())?;
    match identify::gamma_plus_tree(&tree) {
        Ok(b) => Ok(Outcome {
            result: json!({"bounds": b.to_json()}),
            ok: true,
        }),
        Err(AatError::NotAat(r)) => Ok(Outcome {
            result: json!({"bounds": null, "violation": r.to_json(tree.catalog())}),
            ok: false,
        }),
        Err(e) => Err(e.into()),
    }
}

fn structures_cmd(ctx: &mut Ctx, model: &Path, rationale: Option<&Path>, history: Option<&str>) -> anyhow::Result<Outcome> {
    let m = ctx.plain_model(model)?;
    let g = m.gamma();
    let u = m.universe().clone();
    let tree = ctx.tree(&m)?;
    let cla_axiom = structures::axiom_cla(&tree);
    let cla = structures::cla_representation(&tree)?;
    let rsm = structures::rsm_representation(&tree)?;
    let ctc = structures::ctc_representation(&tree)?;
    let rep = |r: &Option<AatModel>| match r {
        Some(model) => json!({"representable": true, "model": io::model_json(model)}),
        None => json!({"representable": false}),
    };
    let filter_violation = structures::attention_filter_violation(g)
        .map(|(menu, y)| json!({"menu": u.set_labels(menu.set()), "removed": u.label(y)}));
    let mut result = json!({
        "gamma": {
            "attention_filter": filter_violation.is_none(),
            "filter_violation": filter_violation,
            "shortlist_rationale": structures::shortlist_rationale(g).map(|r| r.to_json()),
            "coarse_max_rationale": structures::coarse_max_rationale(g).map(|r| r.to_json()),
        },
        "limited_attention_axiom": cla_axiom.to_json(tree.catalog()),
        "cla": rep(&cla),
        "rsm": rep(&rsm),
        "ctc": rep(&ctc),
    });
    let menus = match history {
        Some(h) => {
            let v: Value = serde_json::from_str(h).context("--history: malformed JSON")?;
            io::parse_menus(&u, &v, "history").map_err(|e| anyhow!("{e}"))?
        }
        None => Vec::new(),
    };
    let chosen = m.chosen_set(&menus)?;
    let evolved = structures::evolved_attention(&m, &menus)?;
    result["history"] = json!({
        "menus": menus.iter().map(|x| u.set_labels(x.set())).collect::<Vec<_>>(),
        "chosen": u.set_labels(chosen),
        "evolved_attention_filter": structures::is_attention_filter(&evolved),
        "evolved_shortlist": structures::is_shortlist(&evolved),
        "evolved_coarse_max": structures::is_coarse_max(&evolved),
    });
    if let Some(rp) = rationale {
        let v = ctx.read(rp)?;
        let r = Ctx::located(rp, io::parse_rationale(&v))?;
        let (revised, matches) = match r {
            io::AnyRationale::Binary(r) => {
                let rv = structures::revise_rationale(&r, chosen);
                let g2 = structures::shortlist_from_rationale(&rv)?;
                (rv.to_json(), same_gamma(&g2, &evolved))
            }
            io::AnyRationale::Sets(r) => {
                let rv = structures::revise_set_rationale(&r, chosen);
                let g2 = structures::coarse_max_from_rationale(&rv)?;
                (rv.to_json(), same_gamma(&g2, &evolved))
            }
        };
        result["revision"] = json!({"revised": revised, "matches_evolved_attention": matches});
    }
    Ok(Outcome { result, ok: !cla_axiom.violated() })
}

fn same_gamma(a: &aat_core::AttentionFunction, b: &aat_core::AttentionFunction) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| x == y)
}

fn compat_cmd(ctx: &mut Ctx, class: &Path) -> anyhow::Result<Outcome> {
    let v = ctx.read(class)?;
    let c = Ctx::located(class, io::parse_class(&v))?;
    let conv = compat::is_warp_convex(&c)?;
    let comp = compat::is_compatible(&c)?;
    Ok(Outcome {
        result: json!({
            "members": c.len(),
            "alternatives": c.universe().labels(),
            "convexity": conv.to_json(&c),
            "compatibility": comp.to_json(&c),
            "agree": conv.convex == comp.compatible,
        }),
        ok: conv.convex && comp.compatible,
    })
}

fn frames_cmd(ctx: &mut Ctx, model: &Path, effect: Option<&str>, target: Option<&str>) -> anyhow::Result<Outcome> {
    let m = ctx.framed_model(model)?;
    let tree = ctx.tree(&m)?;
    let cat = tree.catalog();
    let u = m.universe().clone();
    let base = axioms::check_axioms(&tree);
    let mut ok = base.iter().all(|r| !r.violated());
    let kinds: Vec<&Frame> = cat.problems().iter().filter_map(|p| p.frame.as_ref()).collect();
    let all_list = kinds.iter().all(|f| matches!(f, Frame::List(_)));
    let all_rec = kinds.iter().all(|f| matches!(f, Frame::Rec(_)));
    let mut result = json!({"axioms": verdicts(&base, &tree)});
    let structured = |r: Result<represent::Constructed<AatfModel>, AatError>| -> Result<Value, AatError> {
        match r {
            Ok(c) => Ok(json!({"model": c.model.to_json(), "verification": c.verification.to_json(cat)})),
            Err(AatError::NotAat(r)) => Ok(json!({"model": null, "failure": r.to_json(cat)})),
            Err(e) => Err(e),
        }
    };
    if all_list {
        let r = frames::list_axiom(&tree)?;
        ok &= !r.violated();
        result["list_axiom"] = r.to_json(cat);
        result["list_construction"] = structured(frames::build_list_attention(&m, ctx.horizon))?;
    } else if all_rec {
        let r = frames::rec_axiom(&tree)?;
        ok &= !r.violated();
        result["rec_axiom"] = r.to_json(cat);
        result["rec_construction"] = structured(frames::build_rec_attention(&m, ctx.horizon))?;
    } else {
        result["construction"] = match represent::construct_framed_tree(&tree) {
            Ok(c) => json!({"model": c.model.to_json(), "verification": c.verification.to_json(cat)}),
            Err(AatError::NotAat(r)) => json!({"model": null, "failure": r.to_json(cat)}),
            Err(e) => return Err(e.into()),
        };
    }
    if let (Some(e), Some(t)) = (effect, target) {
        let v: Value = serde_json::from_str(e).context("--effect: malformed JSON")?;
        let ps = io::parse_problems(cat, &Value::Array(vec![v]), "effect").map_err(|e| anyhow!("{e}"))?;
        let target = u.alt(t).map_err(|e| anyhow!("--target: {e}"))?;
        let fe = frames::frame_effect_report(&m, &[], ps[0], target, ctx.horizon)?;
        result["effect"] = fe.to_json(&u);
    }
    Ok(Outcome { result, ok })
}

fn popsim_cmd(ctx: &mut Ctx, params: &Path, population: Option<u64>, seed: Option<u64>) -> anyhow::Result<Outcome> {
    let v = ctx.read(params)?;
    let prm = Ctx::located(params, io::parse_params(&v))?;
    let closed = popsim::ratios_closed_form(&prm);
    let agents = popsim::population_from_params(&prm, population)?;
    let size: u64 = agents.iter().map(|a| a.count).sum();
    let sim = popsim::simulate_population(&agents, Assignment::Proportional)?;
    let id = popsim::identify_from_patterns(&sim.group_a, &sim.group_b)?;
    let mut result = json!({
        "params": prm.to_json(),
        "closed_form": closed.to_json(),
        "population": size,
        "proportional": sim.to_json(),
        "matches_closed_form": sim.ratios == closed,
        "identification": id.to_json(),
    });
    if let Some(seed) = seed {
        let r = popsim::simulate_population(&agents, Assignment::Random { seed })?;
        result["random"] = json!({"seed": seed, "simulation": r.to_json()});
    }
    Ok(Outcome {
        ok: sim.ratios == closed && id.consistent,
        result,
    })
}

fn construct(ctx: &mut Ctx, s: &Source) -> anyhow::Result<Outcome> {
    let loaded = ctx.source(s)?;
    let tree = ctx.tree(loaded.oracle())?;
    let cat = tree.catalog();
    let u = cat.universe();
    let built = match &loaded {
        Loaded::Framed(_) => represent::construct_framed_tree(&tree).map(|c| {
            (c.model.to_json(), c.order.to_json(u), c.unranked, c.verification)
        }),
        _ => represent::construct_tree(&tree).map(|c| (io::model_json(&c.model), c.order.to_json(u), c.unranked, c.verification)),
    };
    match built {
        Ok((model, order, unranked, verification)) => Ok(Outcome {
            ok: !verification.violated(),
            result: json!({
                "model": model,
                "order": order,
                "unranked": u.set_labels(unranked),
                "verification": verification.to_json(cat),
            }),
        }),
        Err(AatError::NotAat(r)) => Ok(Outcome {
            result: json!({"model": null, "failure": r.to_json(cat)}),
            ok: false,
        }),
        Err(e) => Err(e.into()),
    }
}

fn run(cli: &Cli) -> anyhow::Result<(Value, bool)> {
    if cli.horizon == 0 {
        return Err(anyhow!("--horizon must be at least 1"));
    }
    let mut ctx = Ctx {
        horizon: cli.horizon,
        universe: cli.universe.clone(),
        inputs: Vec::new(),
    };
    let out = match &cli.command {
        Command::Simulate { model, sequence } => simulate(&mut ctx, model, sequence)?,
        Command::CheckAxioms(s) => check_axioms(&mut ctx, s)?,
        Command::Infer(s) => infer(&mut ctx, s)?,
        Command::Bounds(s) => bounds(&mut ctx, s)?,
        Command::Structures { model, rationale, history } => {
            structures_cmd(&mut ctx, model, rationale.as_deref(), history.as_deref())?
        }
        Command::Compat { class } => compat_cmd(&mut ctx, class)?,
        Command::Frames { model, effect, target } => frames_cmd(&mut ctx, model, effect.as_deref(), target.as_deref())?,
        Command::Popsim { params, population, seed } => popsim_cmd(&mut ctx, params, *population, *seed)?,
        Command::Construct(s) => construct(&mut ctx, s)?,
    };
    let report = json!({
        "tool": "aat",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "horizon": cli.horizon,
        "inputs": ctx.inputs,
        "ok": out.ok,
        "result": out.result,
    });
    Ok((report, out.ok))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, ok)) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
                Format::Markdown => markdown(&report),
            };
            let written = match &cli.output {
                Some(p) => fs::write(p, text).map_err(|e| anyhow!("cannot write {}: {e}", p.display())),
                None => {
                    use std::io::Write;
                    match std::io::stdout().write_all(text.as_bytes()) {
                        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(anyhow!("cannot write report: {e}")),
                        _ => Ok(()),
                    }
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| x.is_string() || x.is_number()) => {
            Some(format!("{{{}}}", a.iter().map(|x| scalar(x).unwrap()).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn cell(v: &Value) -> String {
    scalar(v).unwrap_or_else(|| format!("`{}`", serde_json::to_string(v).unwrap())).replace('|', "\\|")
}

/// Headings for objects, tables for arrays of flat-ish objects, bullets for
/// scalars; anything deeper is inlined as compact JSON.
fn markdown(report: &Value) -> String {
    let mut out = format!(
        "# aat {} ({})\n\n- version: {}\n- horizon: {}\n- ok: {}\n",
        report["command"].as_str().unwrap_or(""),
        if report["ok"] == json!(true) { "ok" } else { "issues found" },
        report["version"].as_str().unwrap_or(""),
        report["horizon"],
        report["ok"],
    );
    for i in report["inputs"].as_array().into_iter().flatten() {
        out += &format!("- input: {} (sha256 {})\n", cell(&i["path"]), cell(&i["sha256"]));
    }
    out.push('\n');
    render(&mut out, &report["result"], 2);
    out
}

fn render(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Object(o) => {
            let (flat, nested): (Vec<_>, Vec<_>) = o.iter().partition(|(_, x)| scalar(x).is_some());
            for (k, x) in flat {
                *out += &format!("- {k}: {}\n", cell(x));
            }
            if !out.ends_with("\n\n") {
                out.push('\n');
            }
            for (k, x) in nested {
                *out += &format!("{} {k}\n\n", "#".repeat(depth.min(6)));
                render(out, x, depth + 1);
            }
        }
        Value::Array(a) if !a.is_empty() && a.iter().all(Value::is_object) => {
            let mut cols: Vec<String> = Vec::new();
            for x in a {
                for k in x.as_object().unwrap().keys() {
                    if !cols.contains(k) {
                        cols.push(k.clone());
                    }
                }
            }
            *out += &format!("| {} |\n|{}\n", cols.join(" | "), " --- |".repeat(cols.len()));
            for x in a {
                let row: Vec<String> = cols.iter().map(|c| cell(&x[c.as_str()])).collect();
                *out += &format!("| {} |\n", row.join(" | "));
            }
            out.push('\n');
        }
        other => {
            *out += &format!("{}\n\n", cell(other));
        }
    }
}
