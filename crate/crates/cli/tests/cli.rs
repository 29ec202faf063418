use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn run(high: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sitcalc"))
        .args(args)
        .arg("--hl")
        .arg(fixture(&format!("logistics/{high}.bat")))
        .arg("--ll")
        .arg(fixture("logistics/low.bat"))
        .arg("--map")
        .arg(fixture("logistics/mapping.map"))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_and_soundness() {
    let o = run("high", &["validate"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("VALID"));
    let o = run("high", &["check-sound"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("SOUND"));
}

#[test]
fn completeness_fails_then_holds_when_repaired() {
    let o = run("high", &["check-complete"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NOT COMPLETE"));
    let o = run("high_complete", &["check-complete"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("COMPLETE"));
}

#[test]
fn plan_and_refine() {
    let o = run("high", &["plan", "--goal", "Delivered(123)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o)
        .contains("takeRoute(123, Rt_A, W, L2), takeRoute(123, Rt_C, L2, Cf), deliver(123)"));
    let plan = "takeRoute(123, Rt_A, W, L2), takeRoute(123, Rt_C, L2, Cf), deliver(123)";
    let o = run("high", &["refine", "--plan", plan, "--model", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("takeRoad(123, Rd_g, L4, Cf)"));
    assert!(text.contains("getSignature(123)"));
    let blocked = "takeRoute(123, Rt_A, W, L2), takeRoute(123, Rt_B, L2, Cf), deliver(123)";
    let o = run("high", &["refine", "--plan", blocked]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn json_output_parses() {
    let o = run("high", &["plan", "--goal", "Delivered(123)", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn explain_and_forecast() {
    let trace = "takeRoad(123, Rd_a, W, L1), takeRoad(123, Rd_b, L1, L2)";
    let o = run("high", &["explain", "--trace", trace]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("takeRoute(123, Rt_A, W, L2)"));
    let o = run(
        "high",
        &["forecast", "--trace", trace, "--candidates", "deliver(123)"],
    );
    let text = stdout(&o);
    assert!(text.contains("takeRoute(123, Rt_C, L2, Cf)"));
    assert!(text.contains("impossible: deliver(123)"));
}

#[test]
fn constraints_report_the_repeated_unload() {
    let o = run("high", &["verify-constraints"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("unload(123), unload(123)"));
}

#[test]
fn usage_and_budget_codes() {
    assert_eq!(run("high", &["plan"]).status.code(), Some(2));
    assert_eq!(run("missing", &["validate"]).status.code(), Some(2));
    assert_eq!(
        run("high", &["check-sound", "--budget", "3"]).status.code(),
        Some(3)
    );
    let o = Command::new(env!("CARGO_BIN_EXE_sitcalc"))
        .arg("frobnicate")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
