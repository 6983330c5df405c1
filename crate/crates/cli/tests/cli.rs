use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn broadbid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_broadbid"))
        .args(args)
        .output()
        .unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = broadbid(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn generate(dir: &Path, name: &str, flags: &[&str]) -> String {
    let out = path(dir, name);
    let mut args = vec!["generate"];
    args.extend_from_slice(flags);
    args.extend_from_slice(&["--out", &out]);
    let res = broadbid(&args);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    out
}

fn query_count(file: &str) -> usize {
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(file).unwrap()).unwrap();
    doc["queries"].as_array().unwrap().len()
}

fn utility(report: &Value) -> f64 {
    report["rows"][0]["utility"].as_f64().unwrap()
}

#[test]
fn generated_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        query_count(&generate(
            d,
            "trap.json",
            &["--family", "greedy-trap", "--n", "8"]
        )),
        36
    );
    let sim = generate(
        d,
        "sim.json",
        &["--family", "simulation", "--keywords", "30", "--seed", "7"],
    );
    assert_eq!(query_count(&sim), 465);
    let graph: PathBuf = d.join("path5.edgelist");
    std::fs::write(&graph, "a b\nb c\nc d\nd e\n").unwrap();
    let is = generate(
        d,
        "is.json",
        &[
            "--family",
            "independent-set",
            "--graph",
            graph.to_str().unwrap(),
        ],
    );
    assert_eq!(query_count(&is), 9);
    let cov = generate(
        d,
        "cov.json",
        &[
            "--family",
            "max-coverage",
            "--sets",
            "0,1;1,2",
            "--weights",
            "1,2,3",
            "--k",
            "1",
        ],
    );
    assert_eq!(query_count(&cov), 5);
    let gap = generate(d, "gap.json", &["--family", "integrality-gap", "--k", "3"]);
    assert_eq!(query_count(&gap), 4 * 5);
}

#[test]
fn trap_examples() {
    let dir = tempfile::tempdir().unwrap();
    let trap = generate(
        dir.path(),
        "trap8.json",
        &["--family", "greedy-trap", "--n", "8"],
    );
    let solve = |method: &str| ok_json(&["solve", "--instance", &trap, "--method", method]);
    assert_eq!(utility(&solve("greedy-margin")), 0.0);
    assert_eq!(utility(&solve("greedy-rate")), 0.0);
    let cut = solve("mincut");
    assert_eq!(utility(&cut), 2.75);
    assert_eq!(utility(&solve("lp")), 2.75);
    assert_eq!(cut["instance"]["queries"], 36);
    assert_eq!(cut["instance"]["biddable"], 8);
    assert_eq!(cut["instance"]["dependency_pairs"], 56);
}

#[test]
fn empty_instance() {
    let dir = tempfile::tempdir().unwrap();
    let empty = path(dir.path(), "empty.json");
    std::fs::write(&empty, r#"{"queries": []}"#).unwrap();
    for method in [
        "lp",
        "mincut",
        "oracle",
        "keyword-exact",
        "keyword-lp-round",
    ] {
        let report = ok_json(&["solve", "--instance", &empty, "--method", method]);
        assert_eq!(utility(&report), 0.0, "{method}");
    }
}

#[test]
fn json_and_csv_agree() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(
        dir.path(),
        "kw.json",
        &[
            "--family",
            "random-keyword",
            "--keywords",
            "4",
            "--seed",
            "5",
        ],
    );
    for method in ["mincut", "keyword-exact", "keyword-lp-round", "budgeted"] {
        let mut args = vec![
            "solve",
            "--instance",
            &inst,
            "--method",
            method,
            "--seed",
            "9",
        ];
        if method == "budgeted" {
            args.extend_from_slice(&["--budget", "3"]);
        }
        let json = ok_json(&args);
        args.extend_from_slice(&["--format", "csv"]);
        let out = broadbid(&args);
        assert!(out.status.success());
        let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
        let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(
            header,
            [
                "id",
                "value",
                "cost",
                "clicks",
                "w",
                "bid_exact",
                "bid_broad",
                "won"
            ]
        );
        let rows: Vec<Vec<String>> = reader
            .records()
            .map(|r| r.unwrap().iter().map(String::from).collect())
            .collect();
        let from_json: Vec<Vec<String>> = json["queries"]
            .as_array()
            .unwrap()
            .iter()
            .map(|q| {
                header
                    .iter()
                    .map(|h| q[h].as_str().unwrap().to_string())
                    .collect()
            })
            .collect();
        assert_eq!(rows, from_json, "{method}");
    }
}

#[test]
fn plan_matches_lp() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(
        dir.path(),
        "b.json",
        &["--family", "random-budgeted", "--size", "20", "--seed", "2"],
    );
    let out = path(dir.path(), "plan.json");
    let res = broadbid(&[
        "plan",
        "--instance",
        &inst,
        "--budget",
        "4.5",
        "--out",
        &out,
    ]);
    assert!(res.status.success());
    let plan: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let lp = plan["plan"]["lp_value"].as_f64().unwrap();
    let realized = plan["plan"]["realized_value"].as_f64().unwrap();
    assert!((lp - realized).abs() <= 1e-6 * lp.abs().max(1.0));
    let budgeted = ok_json(&[
        "solve",
        "--instance",
        &inst,
        "--method",
        "budgeted",
        "--budget",
        "4.5",
    ]);
    assert_eq!(utility(&budgeted), lp);
    let lagr = ok_json(&[
        "solve",
        "--instance",
        &inst,
        "--method",
        "lagrangian",
        "--budget",
        "4.5",
    ]);
    assert!((utility(&lagr) - lp).abs() <= 1e-5 * lp.abs().max(1.0));
}

#[test]
fn experiment_modes() {
    let small = ok_json(&[
        "experiment",
        "sim",
        "--keywords",
        "6",
        "--runs",
        "3",
        "--seed",
        "1",
        "--exact-method",
        "brute",
    ]);
    let bb = ok_json(&[
        "experiment",
        "sim",
        "--keywords",
        "6",
        "--runs",
        "3",
        "--seed",
        "1",
    ]);
    assert_eq!(small["experiment"]["rows"], bb["experiment"]["rows"]);
    assert_eq!(small["experiment"]["dominance_holds"], true);
    let big = ok_json(&[
        "experiment",
        "sim",
        "--keywords",
        "30",
        "--runs",
        "1",
        "--seed",
        "1",
        "--bounds-ok",
    ]);
    assert_eq!(big["experiment"]["method"], "bounds");
    let alias = ok_json(&[
        "experiment",
        "sim",
        "--keywords",
        "8",
        "--runs",
        "1",
        "--exact-method",
        "closed-form",
    ]);
    assert_eq!(alias["experiment"]["method"], "bounds");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let trap = generate(
        dir.path(),
        "trap.json",
        &["--family", "greedy-trap", "--n", "8"],
    );
    let code = |args: &[&str]| broadbid(args).status.code().unwrap();
    assert_eq!(code(&["solve", "--instance", &trap, "--method", "nope"]), 2);
    assert_eq!(
        code(&[
            "solve",
            "--instance",
            &path(dir.path(), "missing.json"),
            "--method",
            "lp"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "solve",
            "--instance",
            &trap,
            "--method",
            "keyword-lp-round",
            "--epsilon",
            "1.5"
        ]),
        2
    );
    assert_eq!(
        code(&["solve", "--instance", &trap, "--method", "budgeted"]),
        2
    );
    assert_eq!(
        code(&[
            "generate",
            "--family",
            "greedy-trap",
            "--n",
            "1",
            "--out",
            &path(dir.path(), "x.json")
        ]),
        2
    );
    assert_eq!(
        code(&[
            "generate",
            "--family",
            "integrality-gap",
            "--k",
            "3",
            "--c",
            "10",
            "--out",
            &path(dir.path(), "g.json")
        ]),
        2
    );
    let bad = path(dir.path(), "bad.json");
    std::fs::write(&bad, r#"{"queries": [{"id": "a", "value": "1", "cost": "-1", "clicks": "1", "biddable": true}]}"#).unwrap();
    assert_eq!(code(&["solve", "--instance", &bad, "--method", "lp"]), 2);
    assert_eq!(
        code(&["solve", "--instance", &trap, "--method", "oracle"]),
        4
    );
    assert_eq!(
        code(&["experiment", "sim", "--keywords", "13", "--runs", "1"]),
        4
    );
    assert_eq!(
        code(&["solve", "--instance", &trap, "--method", "mincut"]),
        0
    );
}

#[test]
fn version_lists_formats() {
    let out = broadbid(&["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(&format!("solver {}", env!("CARGO_PKG_VERSION"))));
    assert!(text.contains(&format!(
        "instance format {}",
        broadbid::INSTANCE_FORMAT_VERSION
    )));
    assert!(text.contains(&format!(
        "report format {}",
        broadbid::REPORT_FORMAT_VERSION
    )));
}

#[test]
fn seeded_commands_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(
        dir.path(),
        "kw.json",
        &[
            "--family",
            "random-keyword",
            "--keywords",
            "5",
            "--seed",
            "3",
        ],
    );
    let run = || {
        let mut v = ok_json(&[
            "solve",
            "--instance",
            &inst,
            "--method",
            "keyword-lp-round",
            "--trials",
            "300",
            "--seed",
            "4",
        ]);
        v["rows"][0]["wall_time_ms"] = Value::Null;
        v
    };
    assert_eq!(run(), run());
    let a = generate(
        dir.path(),
        "a.json",
        &["--family", "random-query", "--size", "12", "--seed", "8"],
    );
    let b = generate(
        dir.path(),
        "b.json",
        &["--family", "random-query", "--size", "12", "--seed", "8"],
    );
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}
