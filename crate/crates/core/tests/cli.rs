use std::path::Path;
use std::process::{Command, Output};

fn phasekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasekit"))
        .args(args)
        .env("PHASEKIT_THREADS", "2")
        .output()
        .expect("run phasekit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn parse_stdout_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn state_writes_modes_and_density() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("packet.csv");
    let o = phasekit(&[
        "state",
        "--state",
        "wavepacket",
        "--param",
        "epsilon=0.2",
        "--param",
        "beta=pi/4",
        "--samples",
        "64",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out);
    assert_eq!(h, ["l", "re", "im", "prob"]);
    let total: f64 = rows.iter().map(|r| r[3].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let (h, rows) = read_csv(&dir.path().join("packet.density.csv"));
    assert_eq!(h, ["theta", "rho"]);
    assert_eq!(rows.len(), 64);
    // density peaks at beta
    let best = rows
        .iter()
        .max_by(|a, b| a[1].parse::<f64>().unwrap().total_cmp(&b[1].parse::<f64>().unwrap()))
        .unwrap();
    assert!((best[0].parse::<f64>().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 0.1);
}

#[test]
fn state_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.json");
    std::fs::write(
        &spec,
        r#"{"type":"explicit","coeffs":[{"l":0,"re":0.6},{"l":3,"re":0.0,"im":0.8}]}"#,
    )
    .unwrap();
    let o = phasekit(&["uncertainty", "--spec", spec.to_str().unwrap(), "--format", "jsonl"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let line: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    // two modes three apart: pi^2/3 - 2|sin 2gamma|/9 with sin gamma = 0.8
    let want = std::f64::consts::PI.powi(2) / 3.0 - 2.0 * (2.0 * 0.6 * 0.8) / 9.0;
    assert!((line["variance"].as_f64().unwrap() - want).abs() < 1e-8);
}

#[test]
fn exit_codes() {
    assert_eq!(
        phasekit(&["uncertainty", "--state", "number", "--param", "l=1"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(phasekit(&["uncertainty", "--state", "nonsense"]).status.code(), Some(2));
    assert_eq!(
        phasekit(&["uncertainty", "--state", "wavepacket"]).status.code(),
        Some(2)
    );
    assert_eq!(
        phasekit(&["uncertainty", "--state", "wavepacket", "--param", "epsilon=-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        phasekit(&["uncertainty", "--state", "number", "--param", "l=1", "--grid-n", "8"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(phasekit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(phasekit(&["--help"]).status.code(), Some(0));
    // a spec that does not exist
    assert_eq!(
        phasekit(&["uncertainty", "--spec", "/nonexistent/spec.json"])
            .status
            .code(),
        Some(2)
    );
    // the density-only state has no momentum spread
    let o = phasekit(&["sweep", "--state", "two_peak", "--vary", "delta", "--values", "0.5,1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn uncertainty_with_oracle() {
    let o = phasekit(&[
        "--oracle",
        "uncertainty",
        "--state",
        "two_mode",
        "--param",
        "l=0",
        "--param",
        "L=2",
        "--param",
        "gamma=0.3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = parse_stdout_csv(&stdout(&o));
    let i = h.iter().position(|c| c == "oracle_pass").unwrap();
    assert_eq!(rows[0][i], "true");
}

#[test]
fn output_is_deterministic() {
    let args = [
        "--seed",
        "7",
        "verify",
        "--suite",
        "relations",
        "--states",
        "20",
        "--alphas",
        "4",
        "--oracle-states",
        "3",
    ];
    let a = phasekit(&args);
    let b = phasekit(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let c = phasekit(&[
        "--seed",
        "8",
        "verify",
        "--suite",
        "relations",
        "--states",
        "20",
        "--alphas",
        "4",
        "--oracle-states",
        "3",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn sweep_epsilon_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("p.dat");
    let o = phasekit(&[
        "sweep",
        "--state",
        "wavepacket",
        "--param",
        "beta=0",
        "--vary",
        "epsilon",
        "--values",
        "0.8,0.4,0.2,0.1,0.05",
        "--plot-data",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = parse_stdout_csv(&stdout(&o));
    assert_eq!(h.len(), 13);
    let col = |name: &str| h.iter().position(|c| c == name).unwrap();
    let dt: Vec<f64> = rows.iter().map(|r| r[col("delta_theta")].parse().unwrap()).collect();
    assert!(dt.windows(2).all(|w| w[1] < w[0]), "{dt:?}");
    assert!(rows.iter().all(|r| r[col("satisfied")] == "true"));
    assert_eq!(rows[0][col("value")], "0.8");
    let text = std::fs::read_to_string(&plot).unwrap();
    assert!(text.starts_with("# value "));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn sweep_unknown_parameter() {
    let o = phasekit(&[
        "sweep",
        "--state",
        "wavepacket",
        "--param",
        "epsilon=0.1",
        "--vary",
        "gamma",
        "--values",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma"));
}

#[test]
fn verify_identities_passes() {
    let o = phasekit(&["verify", "--suite", "identities"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = parse_stdout_csv(&stdout(&o));
    assert_eq!(h, ["suite", "check", "case", "value", "cmp", "bound", "pass"]);
    assert!(!rows.is_empty());
}

#[test]
fn verify_bases_fails_only_on_block_overlap() {
    let o = phasekit(&["verify", "--suite", "bases"]);
    assert_eq!(o.status.code(), Some(1));
    let (_, rows) = parse_stdout_csv(&stdout(&o));
    let failed: Vec<&Vec<String>> = rows.iter().filter(|r| r[6] == "false").collect();
    assert!(!failed.is_empty());
    assert!(
        failed.iter().all(|r| r[1] == "overlap_block_unitarity_defect"),
        "{failed:?}"
    );
}

#[test]
fn repro_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("repro.csv");
    let o = phasekit(&["repro", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out);
    assert_eq!(h[0], "example_id");
    assert!(rows.iter().all(|r| r[6] == "true"));
}
