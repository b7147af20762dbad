use std::process::{Command, Output};

fn aqft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqft"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn build_writes_circuit_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = aqft(&["build", "--n", "5", "--epsilon", "0.625", "--figure-compat", "--out", out, "--qasm"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let circuit = std::fs::read_to_string(dir.path().join("aqft_n5_b3.json")).unwrap();
    let c = aqft::json::from_json(&circuit).unwrap();
    assert_eq!(c.register("data").unwrap().qubits.len(), 5);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("aqft_n5_b3.sidecar.json")).unwrap()).unwrap();
    assert_eq!(sidecar["inventory"], serde_json::json!({"3": 1, "4": 5}));
    assert_eq!(sidecar["params"]["b"], 3);
    let qasm = std::fs::read_to_string(dir.path().join("aqft_n5_b3.qasm")).unwrap();
    assert!(qasm.starts_with("OPENQASM 2.0;"));
    assert!(!qasm.contains("measure"));
}

#[test]
fn build_picks_b_from_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqft(&["build", "--n", "4", "--epsilon", "0.25", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(dir.path().join("aqft_n4_b4.json").exists());
}

#[test]
fn invalid_parameters_are_reported() {
    let o = aqft(&["build", "--n", "3", "--epsilon", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon"));
    // b = 3 needs the figure flag
    let o = aqft(&["build", "--n", "5", "--epsilon", "0.625"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_bounds() {
    let o = aqft(&["verify", "--n", "4", "--epsilon", "0.25", "--seed", "1"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.contains("exact ≤ ledger ≤ π(n−b+3)/2^b: PASS"));
    assert!(!text.contains("FAIL"));
    for force in ["0", "1"] {
        let o = aqft(&["verify", "--n", "5", "--epsilon", "0.3125", "--force-outcomes", force]);
        assert!(o.status.success(), "{}", stdout(&o));
    }
}

#[test]
fn verify_unpruned_is_exact() {
    let o = aqft(&["verify", "--n", "4", "--epsilon", "0.25", "--no-prune"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.contains("unpruned exact error ≤ 1e-8: PASS"));
}

#[test]
fn verify_refuses_wide_circuits() {
    let o = Command::new(env!("CARGO_BIN_EXE_aqft"))
        .args(["verify", "--n", "9", "--epsilon", "0.5"])
        .env("AQFT_MATRIX_CAP", "8")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("smaller n"));
}

fn rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes()).records().map(Result::unwrap).collect()
}

fn column(text: &str, name: &str) -> usize {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.headers().unwrap().iter().position(|h| h == name).unwrap()
}

#[test]
fn cost_row_for_the_small_example() {
    let o = aqft(&["cost", "--n", "5", "--epsilon", "0.625", "--figure-compat"]);
    let text = stdout(&o);
    assert!(o.status.success());
    let r = &rows(&text)[0];
    let large: f64 = r[column(&text, "cf_tcount_adders_large")].parse().unwrap();
    let small: f64 = r[column(&text, "cf_tcount_adders_small")].parse().unwrap();
    assert_eq!(large + small, 68.0);
    assert_eq!(&r[column(&text, "exact_error")], "");
}

#[test]
fn cost_row_at_large_n() {
    let o = aqft(&["cost", "--n", "16384", "--epsilon", "0.001"]);
    let text = stdout(&o);
    assert!(o.status.success());
    let r = &rows(&text)[0];
    let lead: f64 = r[column(&text, "tcount_leading_ratio")].parse().unwrap();
    let depth: f64 = r[column(&text, "tdepth_leading_ratio")].parse().unwrap();
    let base: f64 = r[column(&text, "baseline_tcount_ratio")].parse().unwrap();
    assert!((lead - 1.0).abs() < 0.1, "{lead}");
    assert!((depth - 1.0).abs() < 0.1, "{depth}");
    assert_eq!(base, 2.0);
}

#[test]
fn sweep_is_deterministic_and_tracks_closed_form() {
    let args = ["sweep", "--n-min", "8", "--n-max", "24", "--epsilon", "0.7"];
    let a = stdout(&aqft(&args));
    let b = stdout(&aqft(&args));
    assert_eq!(a, b);
    let recs = rows(&a);
    assert_eq!(recs.len(), 17);
    let tc = column(&a, "t_count");
    let cf = column(&a, "cf_tcount");
    let bcol = column(&a, "b");
    for r in &recs {
        let bits: f64 = r[bcol].parse().unwrap();
        let got: f64 = r[tc].parse().unwrap();
        let want: f64 = r[cf].parse().unwrap();
        assert!((got - want).abs() <= 3.0 * bits, "{r:?}");
    }
}

#[test]
fn export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(aqft(&["build", "--n", "4", "--epsilon", "0.25", "--coherent", "--out", out]).status.success());
    let input = dir.path().join("aqft_n4_b4.json");
    let o = aqft(&["export", input.to_str().unwrap(), "--format", "json"]);
    assert_eq!(stdout(&o), std::fs::read_to_string(&input).unwrap());
    let o = aqft(&["export", input.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("qreg catalyst_a[5];"));
    // measure-based circuits have no QASM 2 form
    assert!(aqft(&["build", "--n", "4", "--epsilon", "0.25", "--out", out]).status.success());
    let o = aqft(&["export", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
