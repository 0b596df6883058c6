use std::process::Command;

use mvt2d::cli::run_cli;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mvt2d").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = run(args);
    let doc = serde_json::from_str(&out).unwrap_or_else(|e| panic!("bad JSON ({e}): {out}\nstderr: {err}"));
    (code, doc)
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn locate_rmvt() {
    let (code, doc) = json(&["locate", "--theorem", "rmvt", "--f", "x^2*y", "--rect", "0,1,0,1"]);
    assert_eq!(code, 0);
    assert_eq!(doc["theorem"], "rmvt");
    assert_eq!(doc["outcome"], "found");
    assert!((num(&doc["point"]["xi1"]) - 0.5).abs() <= 1e-8);
    for field in ["residual", "scale", "method", "evaluations", "rect"] {
        assert!(!doc[field].is_null(), "missing {field}");
    }
    assert_eq!(num(&doc["decomposition"]["delta_f"]), 1.0);
}

#[test]
fn locate_needs_zero_free_rectangle() {
    let (code, out, err) = run(&["locate", "--theorem", "pompeiu2d", "--f", "x*y", "--rect", "-1,2,1,3"]);
    assert_eq!(code, 3);
    assert!(out.is_empty());
    assert!(err.contains("coordinate axes"), "{err}");
}

#[test]
fn locate_boggio() {
    let (code, doc) = json(&[
        "locate",
        "--theorem",
        "boggio2d",
        "--f",
        "x^2*y^2",
        "--g",
        "x*y",
        "--rect",
        "1,2,1,3",
    ]);
    assert_eq!(code, 0);
    let p = num(&doc["point"]["xi1"]) * num(&doc["point"]["xi2"]);
    assert!((p - 6f64.sqrt()).abs() <= 1e-6);
    assert_eq!(num(&doc["decomposition"]["delta_f"]), 24.0);
    assert_eq!(num(&doc["decomposition"]["delta_g"]), 2.0);
}

#[test]
fn locate_one_dimensional() {
    let (code, doc) = json(&["locate", "--theorem", "pompeiu1d", "--f", "x^2", "--rect", "1,2"]);
    assert_eq!(code, 0);
    assert!((num(&doc["point"]["xi1"]) - 2f64.sqrt()).abs() <= 1e-8);
    assert!(doc["point"].get("xi2").is_none());
    assert_eq!(
        run(&["locate", "--theorem", "pompeiu1d", "--f", "x^2", "--rect", "1,2,1,3"]).0,
        2
    );
    assert_eq!(
        run(&["locate", "--theorem", "pompeiu1d", "--f", "x^2", "--rect", "-1,2"]).0,
        3
    );
}

#[test]
fn locate_degenerate_is_success() {
    let (code, doc) = json(&["locate", "--theorem", "rmvt", "--f", "x*y", "--rect", "1,2,1,2"]);
    assert_eq!(code, 0);
    assert_eq!(doc["outcome"], "degenerate-identically-zero");
    assert_eq!(num(&doc["point"]["xi1"]), 1.5);
}

#[test]
fn locate_input_errors() {
    // missing g, bad expression, bad rectangle, unknown theorem, bad tau
    let cases: [&[&str]; 6] = [
        &["locate", "--theorem", "rcmvt", "--f", "x", "--rect", "0,1,0,1"],
        &["locate", "--theorem", "rmvt", "--f", "x*", "--rect", "0,1,0,1"],
        &["locate", "--theorem", "rmvt", "--f", "x", "--rect", "1,0,0,1"],
        &["locate", "--theorem", "rmvt", "--f", "x", "--rect", "0,1,0"],
        &["locate", "--theorem", "lagrange", "--f", "x", "--rect", "0,1,0,1"],
        &[
            "locate",
            "--theorem",
            "rmvt",
            "--f",
            "x",
            "--rect",
            "0,1,0,1",
            "--tau",
            "-1",
        ],
    ];
    for args in cases {
        assert_eq!(run(args).0, 2, "{args:?}");
    }
}

#[test]
fn locate_precondition_errors() {
    // degenerate Δg, Rolle hypothesis, pole inside the rectangle
    let cases: [&[&str]; 3] = [
        &[
            "locate",
            "--theorem",
            "rcmvt",
            "--f",
            "x*y",
            "--g",
            "x+y",
            "--rect",
            "0,1,0,1",
        ],
        &["locate", "--theorem", "rrt", "--f", "x^2*y", "--rect", "0,1,0,1"],
        &["locate", "--theorem", "rmvt", "--f", "1/(x-0.5)", "--rect", "0,1,0,2"],
    ];
    for args in cases {
        let (code, _, err) = run(args);
        assert!(code == 3 || code == 1, "{args:?} gave {code}");
        assert!(!err.is_empty());
    }
    assert_eq!(run(cases[0]).0, 3);
    assert_eq!(run(cases[1]).0, 3);
    // the pole is hit on the sampling grid, so the search fails and names it
    let (code, out, _) = run(cases[2]);
    assert_eq!(code, 1);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["outcome"], "failed");
    assert!(doc["message"].as_str().unwrap().contains("(0.5, "));
}

#[test]
fn verify() {
    let base = [
        "verify",
        "--theorem",
        "pompeiu2d",
        "--f",
        "x^2*y^2",
        "--rect",
        "1,2,1,3",
    ];
    let with = |extra: &[&'static str]| [&base[..], extra].concat();

    let (code, doc) = json(&with(&["--point", "1.5,1.632993", "--tau", "1e-4"]));
    assert_eq!(code, 0);
    assert_eq!(doc["within_tolerance"], true);

    let (code, doc) = json(&with(&["--point", "1.5,2.5"]));
    assert_eq!(code, 0);
    assert!((num(&doc["residual"]) - 8.0625).abs() <= 1e-12);
    assert_eq!(doc["within_tolerance"], false);

    assert_eq!(run(&with(&["--point", "0.5,2"])).0, 3);
    assert_eq!(run(&with(&["--point", "1.5"])).0, 2);
}

#[test]
fn sweep_and_csv() {
    let dir = std::env::temp_dir().join(format!("mvt2d-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cases.csv");
    let args = [
        "sweep",
        "--theorem",
        "pompeiu2d",
        "--family",
        "poly3",
        "--count",
        "5",
        "--seed",
        "9",
        "--csv",
        path.to_str().unwrap(),
    ];
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!((doc["total"].as_u64(), doc["failed"].as_u64()), (Some(5), Some(0)));

    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("case_index,seed,outcome,xi1,xi2,residual"));
    assert_eq!(lines.count(), 5);
    std::fs::remove_dir_all(&dir).unwrap();

    // identical invocations give identical output
    let again = run(&args[..args.len() - 2]).1;
    assert_eq!(again, run(&args[..args.len() - 2]).1);

    let (code, doc) = json(&["sweep", "--family", "bilinear", "--count", "1"]);
    assert_eq!(code, 0);
    assert_eq!(doc["degenerate"], 1);
}

#[test]
fn sweep_bad_flags() {
    assert_eq!(run(&["sweep", "--count", "0"]).0, 2);
    assert_eq!(run(&["sweep", "--family", "wavelet"]).0, 2);
    assert_eq!(run(&["sweep", "--seed", "-3"]).0, 2);
}

#[test]
fn grad_check() {
    let (code, doc) = json(&["grad-check", "--f", "x^2*y", "--at", "2,3"]);
    assert_eq!(code, 0);
    assert_eq!(num(&doc["hyperdual"]["dxy"]), 4.0);
    assert!((num(&doc["finite_difference"]["dxy"]) - 4.0).abs() <= 4e-6);
    assert!(num(&doc["max_rel_error"]) <= 1e-6);

    let (_, doc) = json(&["grad-check", "--f", "x*y", "--at", "-7.5,0.25"]);
    assert_eq!(num(&doc["hyperdual"]["dxy"]), 1.0);

    assert_eq!(run(&["grad-check", "--f", "1/x", "--at", "0,1"]).0, 3);
    assert_eq!(run(&["grad-check", "--f", "log(x)", "--at", "-1,1"]).0, 3);
    assert_eq!(run(&["grad-check", "--f", "x", "--at", "1"]).0, 2);
}

#[test]
fn parse_tree() {
    let (code, out, _) = run(&["parse", "--f", "x^2*y^2"]);
    assert_eq!(code, 0);
    assert_eq!(out, "*\n  ^\n    x\n    2\n  ^\n    y\n    2\n");

    let (code, out, _) = run(&["parse", "--f", "t*s"]);
    assert_eq!(code, 0);
    assert_eq!(out, "*\n  x\n  y\n");

    let (code, out, err) = run(&["parse", "--f", "2*+x"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("offset 2") && err.contains("empty operand"), "{err}");
}

#[test]
fn json_numbers_have_17_digits() {
    let (_, out, _) = run(&[
        "verify",
        "--theorem",
        "rmvt",
        "--f",
        "x^2*y",
        "--rect",
        "0,1,0,1",
        "--point",
        "0.25,0.5",
    ]);
    assert!(out.contains("\"residual\":5.0000000000000000e-1"), "{out}");
}

#[test]
fn help_and_usage() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("locate") && out.contains("grad-check"));
    assert_eq!(run(&[]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_mvt2d");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();

    let ok = status(&["locate", "--theorem", "rmvt", "--f", "x^2*y", "--rect", "0,1,0,1"]);
    assert_eq!(ok.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(doc["outcome"], "found");

    assert_eq!(status(&["parse", "--f", "2*+x"]).status.code(), Some(2));
    assert_eq!(
        status(&["locate", "--theorem", "pompeiu2d", "--f", "x*y", "--rect", "-1,2,1,3"])
            .status
            .code(),
        Some(3)
    );
}
