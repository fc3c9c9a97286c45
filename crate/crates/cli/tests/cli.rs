use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn aat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aat")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn scratch(name: &str, body: &str) -> String {
    let p = std::env::temp_dir().join(format!("aat-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn late_warp_passes_with_counterfactual_census() {
    let out = aat(&["check-axioms", "--model", &fixture("late_warp.json"), "--horizon", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let res = &r["result"];
    assert!(res["axioms"].as_array().unwrap().iter().all(|a| a["verdict"] == "pass"));
    let census = &res["warp_violations"];
    assert!(census["total"].as_u64().unwrap() > 0);
    assert!(census["items"].as_array().unwrap().len() <= 50);
    assert!(census["items"].as_array().unwrap().iter().any(|v| v["kind"] == "counterfactual"));
}

#[test]
fn worst_first_preference() {
    let out = aat(&["infer", "--model", &fixture("worst_first.json")]);
    assert_eq!(out.status.code(), Some(0));
    let pref = &report(&out)["result"]["preference"];
    assert_eq!(pref["order"], serde_json::json!(["y", "x"]));
    assert_eq!(pref["never_chosen"], serde_json::json!(["z"]));
}

#[test]
fn cyclic_class_is_rejected_both_ways() {
    let out = aat(&["compat", "--class", &fixture("cyclic4.json")]);
    assert_eq!(out.status.code(), Some(1));
    let res = &report(&out)["result"];
    assert_eq!(res["convexity"]["warp_convex"], false);
    assert_eq!(res["compatibility"]["compatible"], false);
    assert!(res["compatibility"]["failure"]["escapes"].as_array().unwrap().len() == 24);
}

#[test]
fn envelope_and_determinism() {
    let path = fixture("late_warp.json");
    let a = aat(&["construct", "--model", &path]);
    let b = aat(&["construct", "--model", &path]);
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    assert_eq!(r["tool"], "aat");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["horizon"], 4);
    assert_eq!(r["command"], "construct");
    let digest = r["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert_eq!(r["result"]["verification"]["verdict"], "pass");
}

#[test]
fn malformed_inputs_exit_two_with_location() {
    let bad = scratch("bad.json", "{\"alternatives\": [\"x\", ");
    let out = aat(&["check-axioms", "--model", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed JSON"));

    let unknown = scratch(
        "unknown.json",
        r#"{"alternatives": ["x","y"], "observations": [{"menus": [["x","y"]], "choices": ["q"]}]}"#,
    );
    let out = aat(&["check-axioms", "--dataset", &unknown]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown.json") && err.contains("observations[0].choices[0]"), "{err}");

    let inconsistent = scratch(
        "inconsistent.json",
        r#"{"observations": [{"menus": [["x","y"]], "choices": ["x"]}, {"menus": [["x","y"]], "choices": ["y"]}]}"#,
    );
    let out = aat(&["infer", "--dataset", &inconsistent]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn universe_override() {
    let out = aat(&["check-axioms", "--model", &fixture("worst_first.json"), "--universe", "a,b"]);
    assert_eq!(out.status.code(), Some(2));
    let out = aat(&["infer", "--dataset", &fixture("observed.json"), "--universe", "x,y,z,w"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["result"]["preference"]["never_chosen"]
        .as_array()
        .unwrap()
        .contains(&Value::from("w")));
}

#[test]
fn dataset_verdicts_are_not_falsified() {
    let out = aat(&["check-axioms", "--dataset", &fixture("observed.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["aat_consistent"], "not-falsified");
}

#[test]
fn frames_and_effects() {
    let out = aat(&["frames", "--model", &fixture("unsought_advice.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["result"]["rec_axiom"]["verdict"], "violated");

    let out = aat(&["frames", "--model", &fixture("diapers.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["list_construction"]["verification"]["verdict"], "pass");

    let effect = r#"{"menu":["x","y","z"],"frame":{"kind":"generic","tag":"alert"}}"#;
    let out = aat(&["frames", "--model", &fixture("alert_fail.json"), "--effect", effect, "--target", "x"]);
    let e = &report(&out)["result"]["effect"];
    assert_eq!((e["success"].clone(), e["lasting"].clone(), e["repeat_futile"].clone()), (false.into(), false.into(), true.into()));
}

#[test]
fn popsim_reports_exact_ratios() {
    let out = aat(&["popsim", "--params", &fixture("population.json"), "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &report(&out)["result"];
    assert_eq!(r["closed_form"]["R_A_t2"]["exact"], "2/3");
    assert_eq!(r["matches_closed_form"], true);
    assert!(r["random"]["simulation"]["group_a"].is_object());
}

#[test]
fn structures_revision_matches_evolution() {
    let out = aat(&[
        "structures",
        "--model",
        &fixture("restaurants.json"),
        "--rationale",
        &fixture("restaurants_rationale.json"),
        "--history",
        r#"[["m1","m2"]]"#,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = &report(&out)["result"];
    assert_eq!(r["revision"]["matches_evolved_attention"], true);
    assert_eq!(r["history"]["evolved_coarse_max"], true);
}

#[test]
fn simulate_replays_the_late_reversal() {
    let seq = r#"[["y","z'"],["x","y","z","z'"],["x","y"]]"#;
    let out = aat(&["simulate", "--model", &fixture("late_warp.json"), "--sequence", seq]);
    let choices: Vec<String> = report(&out)["result"]["periods"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["choice"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(choices, ["y", "y", "x"]);
}

#[test]
fn markdown_output() {
    let out = aat(&["bounds", "--model", &fixture("worst_first.json"), "--format", "markdown"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# aat bounds"));
    assert!(text.contains("| lower | menu | upper |"), "{text}");
}
