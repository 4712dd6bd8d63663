use std::path::PathBuf;
use std::process::{Command, Output};

const FIXTURE: &str = "fixtures/top500_sample.csv";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amdahl-lens"))
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn golden(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(p).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn alpha_reports_fugaku_fraction() {
    let out = run(&["alpha", "--efficiency", "0.808", "--cores", "7299072"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "alpha");
    let oma = v["results"][0]["one_minus_alpha"].as_f64().unwrap();
    assert!((oma / 3.25e-8 - 1.0).abs() < 0.02);
}

#[test]
fn alpha_from_rmax_and_rpeak() {
    let out = run(&[
        "alpha", "--rmax", "74", "--rpeak", "100", "--cores", "2414592",
    ]);
    let oma = json(&out)["results"][0]["one_minus_alpha"]
        .as_f64()
        .unwrap();
    assert!((oma / 14.7e-8 - 1.0).abs() < 0.02);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["alpha", "--cores", "10"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["alpha", "--efficiency", "1.5", "--cores", "10"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        run(&[
            "decompose",
            "--model",
            "serial",
            "--time16",
            "2",
            "--time64",
            "1"
        ])
        .status
        .code(),
        Some(3)
    );
    assert_eq!(
        run(&["ingest", "--in", "no/such/file.csv"]).status.code(),
        Some(4)
    );
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn integrity_error_is_data_error() {
    let p = scratch("bad.csv");
    std::fs::write(
        &p,
        "name,epoch,workload,cores_total,cores_used,rpeak_flops,rmax_flops\nX,2020-06,HPL,10,10,1,2\n",
    )
    .unwrap();
    let out = run(&["ingest", "--in", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn ingest_matches_golden() {
    let out = run(&["ingest", "--in", FIXTURE]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        golden("ingest.json")
    );
}

#[test]
fn curve_matches_golden_in_both_formats() {
    let args = [
        "predict",
        "--curve",
        "--in",
        FIXTURE,
        "--n-range",
        "1:1e9:16",
    ];
    let out = run(&args);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        golden("predict_curve.json")
    );

    let p = scratch("curve.csv");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", p.to_str().unwrap()]);
    assert_eq!(run(&with_out).status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(&p).unwrap(),
        golden("predict_curve.csv")
    );
}

#[test]
fn bounds_all_has_combined_row() {
    let v = json(&run(&["bounds"]));
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4]["kind"], "combined");
    assert_eq!(rows[1]["sequential_cycles"], 668);
}

#[test]
fn decompose_fixture_pairs() {
    let v = json(&run(&["decompose", "--model", "serial", "--in", FIXTURE]));
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["name"], "Fugaku");
    let f0 = rows[0]["f0"].as_f64().unwrap();
    assert!((f0 / 1.3e-8 - 1.0).abs() < 0.02);
}

#[test]
fn simulate_config_file_and_flags_agree() {
    let p = scratch("sim.json");
    std::fs::write(
        &p,
        r#"{"n": 8, "dispatch_cycles": 1, "join_cycles": 1, "payload_cycles": 1000}"#,
    )
    .unwrap();
    let from_file = json(&run(&["simulate", "--config", p.to_str().unwrap()]));
    let from_flags = json(&run(&[
        "simulate",
        "--units",
        "8",
        "--dispatch",
        "1",
        "--join",
        "1",
        "--payload",
        "1000",
    ]));
    assert_eq!(from_file["results"], from_flags["results"]);
    assert_eq!(from_file["results"][0]["total_cycles"], 1016);
}

#[test]
fn simulate_sweep_rows() {
    let v = json(&run(&["simulate", "--preset", "hpcg", "--sweep", "2,4,8"]));
    let ns: Vec<u64> = v["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["n"].as_u64().unwrap())
        .collect();
    assert_eq!(ns, vec![2, 4, 8]);
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec!["ingest", "--in", FIXTURE],
        vec!["predict", "--validate", "--in", FIXTURE],
        vec!["predict", "--surface", "--format", "csv"],
        vec!["simulate", "--preset", "brain", "--sweep", "1:10000:9"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
