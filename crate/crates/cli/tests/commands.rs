use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nestfn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nestfn"))
        .args(args)
        .env_remove("NESTFN_STRICT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("not one JSON document ({e}): {}", stdout(o)))
}

const MID: [&str; 10] = [
    "--A", "1", "--sigma", "0.5", "--delta", "0.5", "--p", "0.5", "--q", "0.5",
];

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run(args: Vec<String>) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    nestfn(&refs)
}

#[test]
fn eval_unit_point_collapses_to_a() {
    let out = nestfn(&[
        "eval", "--A", "3", "--sigma", "0.7", "--delta", "0.4", "--p", "0.5", "--q", "0.5", "--K",
        "1", "--L", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "3\n");
}

#[test]
fn eval_zero_capital_is_domain_error_naming_k() {
    let out = run(with(
        &["eval"],
        &[&MID[..], &["--K", "0", "--L", "1"]].concat(),
    ));
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains('K'));
}

#[test]
fn nonpositive_bracket_is_domain_error() {
    // sigma = 2, tiny K and large L drive the bracket negative.
    let out = nestfn(&[
        "eval", "--A", "1", "--sigma", "2", "--delta", "0.5", "--p", "0.5", "--q", "0.5", "--K",
        "0.01", "--L", "100",
    ]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn bad_flag_is_usage_error_with_hint() {
    let out = nestfn(&["eval", "--bogus", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn every_json_subcommand_emits_exactly_one_document() {
    for (cmd, kind) in [
        ("eval", "eval"),
        ("grad", "gradient"),
        ("elasticity", "elasticity"),
        ("hessian", "hessian"),
        ("reduce", "reduce"),
        ("audit", "audit"),
    ] {
        let out = run(with(
            &[cmd],
            &[&MID[..], &["--K", "4", "--L", "1", "--json"]].concat(),
        ));
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        let doc = json(&out);
        assert_eq!(doc["kind"], kind);
        assert_eq!(doc["schema_version"], "1.0");
    }
}

#[test]
fn worked_point_values() {
    let grad = json(&run(with(
        &["grad"],
        &[&MID[..], &["--K", "4", "--L", "1", "--json"]].concat(),
    )));
    assert!((grad["payload"]["dV_dK"].as_f64().unwrap() - 12.0 / 1331.0).abs() < 1e-12);
    let el = json(&run(with(
        &["elasticity"],
        &[&MID[..], &["--K", "4", "--L", "1", "--json"]].concat(),
    )));
    assert!((el["payload"]["eps_l"].as_f64().unwrap() + 25.0 / 33.0).abs() < 1e-12);
    let audit = json(&run(with(
        &["audit"],
        &[&MID[..], &["--K", "4", "--L", "1", "--json"]].concat(),
    )));
    let dev = audit["payload"]["entries"]["labor_elasticity_closed_form"]["abs_deviation"]
        .as_f64()
        .unwrap();
    assert!((dev - 0.8826).abs() < 1e-3);
}

#[test]
fn reduce_names_the_form() {
    let out = nestfn(&[
        "reduce", "--A", "2", "--sigma", "0", "--delta", "0.3", "--p", "0.5", "--q", "0.7", "--K",
        "2", "--L", "1",
    ]);
    let text = stdout(&out);
    assert!(text.contains("SigmaZero"), "{text}");
    assert!(text.contains("reduced_value\t4\n"), "{text}");
}

#[test]
fn diagnose_flags_inhomogeneity() {
    let args = with(
        &["diagnose"],
        &[
            &MID[..],
            &[
                "--kmin",
                "0.5",
                "--kmax",
                "10",
                "--lmin",
                "0.5",
                "--lmax",
                "10",
                "--grid",
                "8",
                "--samples",
                "10000",
                "--seed",
                "7",
                "--json",
            ],
        ]
        .concat(),
    );
    let first = run(args.clone());
    assert_eq!(first.status.code(), Some(0));
    let doc = json(&first);
    assert_eq!(doc["kind"], "diagnostics");
    assert_eq!(doc["payload"]["homogeneity"]["is_homogeneous"], false);
    assert_eq!(doc["payload"]["homogeneity"]["claimed_degree_one"], false);
    assert_eq!(run(args).stdout, first.stdout);
}

fn synth_to(path: &Path, n: &str, noise: &str) {
    let out = nestfn(&[
        "synth",
        "--A",
        "2",
        "--sigma",
        "0.8",
        "--delta",
        "0.6",
        "--p",
        "0.4",
        "--q",
        "0.7",
        "--n",
        n,
        "--noise",
        noise,
        "--seed",
        "11",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
}

#[test]
fn synth_without_out_prints_csv() {
    let out = nestfn(&[
        "synth", "--A", "2", "--sigma", "0.8", "--delta", "0.6", "--p", "0.4", "--q", "0.7", "--n",
        "3", "--noise", "0", "--seed", "1",
    ]);
    let text = stdout(&out);
    assert!(text.starts_with("industry_code,year,K,L,V\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn noiseless_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("panel.csv");
    synth_to(&panel, "200", "0");
    let report = dir.path().join("report.json");
    let args = [
        "fit",
        "--input",
        panel.to_str().unwrap(),
        "--starts",
        "32",
        "--seed",
        "7",
        "--json",
    ];
    let out = nestfn(&[&args[..], &["--out", report.to_str().unwrap()]].concat());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json(&out);
    assert_eq!(doc["kind"], "fit");
    assert!(
        doc["payload"]["rss"].as_f64().unwrap() <= 1e-10,
        "{}",
        stdout(&out)
    );
    assert_eq!(std::fs::read(&report).unwrap(), out.stdout);
    assert_eq!(nestfn(&args).stdout, out.stdout);
}

#[test]
fn fit_reads_stdin_and_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("panel.csv");
    synth_to(&panel, "120", "0.05");
    let out = Command::new(env!("CARGO_BIN_EXE_nestfn"))
        .args([
            "fit",
            "--input",
            "-",
            "--industry",
            "SYN",
            "--starts",
            "4",
            "--seed",
            "3",
        ])
        .stdin(std::fs::File::open(&panel).unwrap())
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
    let text = stdout(&out);
    assert!(
        text.starts_with("Industry Code: SYN\nR2\tStdError"),
        "{text}"
    );
}

#[test]
fn fit_rejects_bad_csv() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("bad.csv");
    std::fs::write(&panel, "industry_code,year,K,L,V\n151,2010,-1,1,1\n").unwrap();
    let out = nestfn(&[
        "fit",
        "--input",
        panel.to_str().unwrap(),
        "--starts",
        "2",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn params_file_supplies_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("params.json");
    std::fs::write(
        &file,
        r#"{"A": 3, "sigma": 0.7, "delta": 0.4, "p": 0.5, "q": 0.5}"#,
    )
    .unwrap();
    let out = nestfn(&["eval", "--params", file.to_str().unwrap()]);
    assert_eq!(stdout(&out), "3\n");
    let out = nestfn(&["eval", "--params", file.to_str().unwrap(), "--A", "5"]);
    assert_eq!(stdout(&out), "5\n");
}

#[test]
fn strict_env_narrows_ranges() {
    let out = Command::new(env!("CARGO_BIN_EXE_nestfn"))
        .args([
            "eval", "--A", "1", "--sigma", "0.5", "--delta", "0.5", "--p", "1.5", "--q", "0.5",
        ])
        .env("NESTFN_STRICT", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn elasticity_survives_zero_marginal_product() {
    // sigma = delta = 1 collapses to A/K, so dV/dL = 0.
    let out = nestfn(&[
        "elasticity",
        "--A",
        "1",
        "--sigma",
        "1",
        "--delta",
        "1",
        "--p",
        "0.5",
        "--q",
        "0.5",
        "--K",
        "3",
        "--L",
        "2",
        "--json",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json(&out);
    assert!((doc["payload"]["eps_k"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!(doc["payload"]["substitution_elasticity"].is_null());
    assert_eq!(doc["nonfinite"][0], "payload.substitution_elasticity");
}
