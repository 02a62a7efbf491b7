use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskshard"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with(cmd: &str, scenarios: &str, measures: &str, extra: &[&str]) -> Output {
    let (s, m) = (fixture(scenarios), fixture(measures));
    let mut args = vec![
        cmd,
        "--scenarios",
        s.to_str().unwrap(),
        "--measures",
        m.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}\nstdout: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("{v} is not a number"))
}

#[test]
fn eval_offsetting_scenarios() {
    let out = run_with("eval", "offsetting.csv", "rvar.json", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let m = &report(&out)["measures"][0];
    assert!((num(&m["value"]) + 1.0).abs() <= 1e-12);
    assert!(num(&m["dual_residual"]) <= 1e-10);
    assert_eq!(m["var_type"], true);
    assert_eq!(m["parameter"], 0.25);
    assert_eq!(m["concave_active_part"], true);
}

#[test]
fn eval_constant_gives_the_constant() {
    let out = run_with("eval", "constant.csv", "mixed.json", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    let measures = r["measures"].as_array().unwrap();
    assert_eq!(measures.len(), 5);
    for m in measures {
        assert!((num(&m["value"]) - 7.5).abs() <= 1e-9, "{m}");
    }
}

#[test]
fn eval_warns_about_an_ignored_tail() {
    let out = run_with("eval", "tail.csv", "var005.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("tail beyond V@R ignored"));
    let m = &report(&out)["measures"][0];
    assert_eq!(num(&m["value"]), -2.0);
    assert!(m["warnings"][0]
        .as_str()
        .unwrap()
        .contains("tail beyond V@R ignored"));
}

#[test]
fn allocate_var_pair_reaches_essinf() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with(
        "allocate",
        "quarters.csv",
        "var_pair.json",
        &["--out", dir.path().to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(num(&r["realized_total"]), 0.0);
    assert_eq!(r["prediction_holds"], true);
    assert_eq!(r["regime"], "best_case_collapse");
    assert!(r["notes"][0].as_str().unwrap().contains("g ≡ 0 regime"));
    let csv = std::fs::read_to_string(dir.path().join("allocation.csv")).unwrap();
    assert!(csv.starts_with("part_index,u_left,u_right,value\n"));
    let saved: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(saved, r);
}

#[test]
fn allocate_escape_is_linear_in_m() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with(
        "allocate",
        "quarters.csv",
        "rvar_pair.json",
        &[
            "--strategy",
            "escape",
            "--m",
            "3",
            "--out",
            dir.path().to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    let check = &r["linear_check"];
    assert_eq!(check["holds"], true);
    assert!((num(&check["expected_slope"]) + 1.0 / 3.0).abs() <= 1e-12);
    // total = c - m/3 with m = 3
    let c = num(&r["realized_total"]) + 1.0;
    assert!((c - 1.0 / 3.0).abs() <= 1e-12, "c = {c}");
}

#[test]
fn allocate_picks_var_type_collapse() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with(
        "allocate",
        "quarters.csv",
        "truncated_pair.json",
        &["--out", dir.path().to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["strategy"], "var_type");
    assert_eq!(r["strategy_source"], "auto");
    assert_eq!(num(&r["realized_total"]), 0.0);
}

#[test]
fn hypothesis_violations_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run_with(
        "allocate",
        "quarters.csv",
        "avar_pair.json",
        &["--strategy", "escape", "--m", "1", "--out", d],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("no unbounded escape"));
    let out = run_with(
        "allocate",
        "quarters.csv",
        "avar_pair.json",
        &["--strategy", "var_type", "--out", d],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("measure 1"));
}

#[test]
fn input_errors_exit_2() {
    let out = run_with("eval", "bad.csv", "rvar.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
    let out = run_with("eval", "missing.csv", "rvar.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_with(
        "allocate",
        "quarters.csv",
        "rvar_pair.json",
        &["--strategy", "escape"],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = run_with(
        "allocate",
        "quarters.csv",
        "rvar_pair.json",
        &["--strategy", "greedy"],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = run_with("eval", "quarters.csv", "bad_measure.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scr_on_the_tail_sheet() {
    let dir = tempfile::tempdir().unwrap();
    let (bs, m) = (fixture("tail_sheet.json"), fixture("var_avar005.json"));
    let out = run(&[
        "scr",
        "--balance-sheet",
        bs.to_str().unwrap(),
        "--measures",
        m.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    let var = &r["standalone"][0];
    assert_eq!(num(&var["scr"]), -2.0);
    assert_eq!(var["solvent"], true);
    assert_eq!(var["probability_test"], true);
    assert_eq!(var["predicates_agree"], true);
    assert!((num(&r["standalone"][1]["scr"]) - 47.6).abs() <= 1e-9);
    let net = &r["network"];
    assert_eq!(num(&net["total_scr"]), num(&net["best_case"]));
    let csv = std::fs::read_to_string(dir.path().join("network.csv")).unwrap();
    assert!(csv.starts_with("entity,scr,regime\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn oracle_finds_the_offsetting_pair() {
    let out = run_with("oracle", "zero.csv", "rvar_pair.json", &["--bound", "6"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert!(num(&r["minimum"]) <= -1.0);
    assert_eq!(r["gap_sign"], "negative");
}

#[test]
fn oracle_on_coherent_pair_is_zero() {
    let out = run_with("oracle", "zero.csv", "avar_pair.json", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(num(&r["minimum"]), 0.0);
    assert_eq!(r["gap_sign"], "zero");
}

#[test]
fn oracle_respects_the_optimal_value() {
    let out = run_with(
        "oracle",
        "quarters.csv",
        "rvar_opt_pair.json",
        &["--bound", "4"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert!(num(&r["minimum"]) >= num(&r["optimal_value"]) - 1e-9);
}

#[test]
fn oversize_oracle_is_refused() {
    let out = run_with(
        "oracle",
        "zero.csv",
        "rvar_pair.json",
        &["--grid", "0.001", "--cells", "8"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("too large"));
}

#[test]
fn outputs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_with(
        "allocate",
        "quarters.csv",
        "rvar_opt_pair.json",
        &["--out", a.path().to_str().unwrap()],
    );
    let second = run_with(
        "allocate",
        "quarters.csv",
        "rvar_opt_pair.json",
        &["--out", b.path().to_str().unwrap()],
    );
    assert_eq!(first.stdout, second.stdout);
    for name in ["allocation.csv", "report.json"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap()
        );
    }
    let s1 = run(&["selftest", "--seed", "9"]);
    let s2 = run(&["selftest", "--seed", "9"]);
    assert_eq!(s1.stdout, s2.stdout);
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["seed"], 42);
    assert_eq!(r["failed"], 0);
}
