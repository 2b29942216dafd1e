use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_finslerkit"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("FINSLERKIT_THREADS", t),
        None => cmd.env_remove("FINSLERKIT_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn minkowski_plane_has_two_null_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let o = run(&["--model", "minkowski", "--cmd", "classify-plane", "--out", p(&out), "--grid", "60x60"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = &json(&dir.path().join("scan.csv.json"))["result"];
    // two lines through the origin are four rays
    assert_eq!(summary["null_rays"], 4);
    assert_eq!(summary["closed_future_components"], 1);

    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# finslerkit "));
    assert!(lines.next().unwrap().starts_with("# config {"));
    assert_eq!(lines.next().unwrap(), "y1,y2,sign_l,det_sign,signature,in_omega,in_cone");
    assert_eq!(lines.count(), 3600);
}

#[test]
fn bimetric_plane_has_eight_null_rays() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let o = run(&["--model", "bimetric-flat", "--cmd", "classify-plane", "--out", p(&out), "--grid", "80x80"], None);
    assert!(o.status.success());
    let summary = &json(&dir.path().join("scan.csv.json"))["result"];
    assert_eq!(summary["null_rays"], 8);
    assert_eq!(summary["degeneracy_rays"], 4);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &Path| {
        vec!["--model", "bimetric-flat", "--cmd", "classify-plane", "--grid", "50x40", "--out"]
            .into_iter()
            .map(String::from)
            .chain([p(out).to_string()])
            .collect::<Vec<_>>()
    };
    let a_args = args(&a);
    let b_args = args(&b);
    assert!(run(&a_args.iter().map(String::as_str).collect::<Vec<_>>(), Some("1")).status.success());
    assert!(run(&b_args.iter().map(String::as_str).collect::<Vec<_>>(), Some("3")).status.success());
    // the config lines differ only in the recorded thread cap
    let strip = |s: String| s.lines().skip(2).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(std::fs::read_to_string(&a).unwrap()), strip(std::fs::read_to_string(&b).unwrap()));

    let c = dir.path().join("c.json");
    let d = dir.path().join("d.json");
    for out in [&c, &d] {
        let o = run(&["--model", "bimetric-curved", "--cmd", "cartan", "--samples", "5", "--seed", "9", "--out", p(out)], None);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&c).unwrap(), std::fs::read(&d).unwrap());
}

#[test]
fn inertial_geodesic_is_a_straight_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let o = run(&["--model", "minkowski", "--cmd", "geodesic", "--y", "1.25,0.75,0,0", "--span", "5", "--out", p(&out)], None);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(3)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 2);
    for r in &rows {
        let tau = r[0];
        assert!((r[1] - 1.25 * tau).abs() <= 1e-9 && (r[2] - 0.75 * tau).abs() <= 1e-9);
        assert!((r[9] - 1.0).abs() <= 1e-9);
    }
    assert!(json(&dir.path().join("g.csv.json"))["result"]["f_drift"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn transport_to_the_same_frame_is_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = run(&["--model", "bimetric-curved", "--cmd", "transport", "--y", "1,0.1,0,0", "--out", p(&out)], None);
    assert!(o.status.success());
    let doc = json(&out);
    let lambda = doc["result"]["lambda"].as_array().unwrap();
    for (i, row) in lambda.iter().enumerate() {
        for (j, v) in row.as_array().unwrap().iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v.as_f64().unwrap() - want).abs() <= 1e-10);
        }
    }
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["cmd"], "transport");
}

#[test]
fn cartan_conditions_pass_on_bimetric() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = run(&["--model", "bimetric-curved", "--cmd", "cartan", "--samples", "20", "--out", p(&out)], None);
    assert!(o.status.success());
    let r = &json(&out)["result"]["cartan"];
    for k in ["c1_pass", "c2_pass", "c3_pass"] {
        assert_eq!(r["conditions"][k], true, "{k}");
    }
    let (c, f) = (r["cartan_density"].as_f64().unwrap(), r["finsler_density"].as_f64().unwrap());
    assert!((c - f).abs() <= 1e-9);
}

#[test]
fn model_files_are_loaded_and_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("flrw.json");
    let spec = r#"{"kind": "metric-induced", "degree": 2,
        "params": {"metric": {"preset": "diag-scale", "a": {"sum": [{"const": 1.0}, {"prod": [{"const": 0.1}, {"var": 0}]}]}}}}"#;
    std::fs::write(&model, spec).unwrap();
    let out = dir.path().join("cu.json");
    let o = run(&["--model", p(&model), "--cmd", "curvature", "--y", "1,0.2,0,0", "--out", p(&out)], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&out);
    assert_eq!(doc["config"]["model_spec"]["kind"], "metric-induced");
    assert!(doc["result"]["oracle"]["rlin_vs_riemann"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    // missing model file: configuration
    let o = run(&["--model", "missing.json", "--cmd", "curvature", "--out", p(&out)], None);
    assert_eq!(o.status.code(), Some(2));
    // malformed grid: configuration (rejected by the argument parser)
    let o = run(&["--model", "minkowski", "--cmd", "classify-plane", "--grid", "10by10", "--out", p(&out)], None);
    assert_eq!(o.status.code(), Some(2));
    // unknown model kind: configuration
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind": "randers"}"#).unwrap();
    let o = run(&["--model", p(&bad), "--cmd", "curvature", "--out", p(&out)], None);
    assert_eq!(o.status.code(), Some(2));
    // spacelike direction is not an observer: domain
    let o = run(&["--model", "minkowski", "--cmd", "observer", "--y", "1,2,0,0", "--out", p(&out)], None);
    assert_eq!(o.status.code(), Some(3));
    // null direction: domain
    let o = run(&["--model", "minkowski", "--cmd", "curvature", "--y", "1,1,0,0", "--out", p(&out)], None);
    assert_eq!(o.status.code(), Some(3));
    // bad thread count: configuration
    let o = run(&["--model", "minkowski", "--cmd", "curvature", "--out", p(&out)], Some("zero"));
    assert_eq!(o.status.code(), Some(2));
}
