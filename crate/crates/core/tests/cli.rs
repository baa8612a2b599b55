use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairing-vqe")).args(args).output().expect("spawn pairing-vqe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exact_prints_correlation_energy() {
    let o = bin(&["exact"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("-14.800000"), "{s}");
    assert!(s.contains("-0.218534"), "{s}");
}

#[test]
fn transpile_reports_depth() {
    let o = bin(&["transpile", "--theta", "0.3,0.2,0.1,0.4,1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let line = s.lines().find(|l| l.starts_with("# depth")).expect("depth line");
    let d: usize = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((150..=400).contains(&d), "{line}");
    assert!(s.lines().any(|l| l.starts_with("cx")), "no CX gates in listing");
}

#[test]
fn statevector_run_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "--seed", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(stdout(&o).lines().take_while(|l| !l.starts_with("written")).collect::<String>().as_str())
            .unwrap();
    assert_eq!(summary["verdict"], "Converged");
    let e = summary["e_corr_bar_mev"].as_f64().unwrap();
    assert!((e - -0.218534).abs() < 0.01, "{e}");
    let run = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    assert!(run.join("summary.json").is_file());
    let jsonl = std::fs::read_to_string(run.join("records").join("run.jsonl")).unwrap();
    assert!(jsonl.lines().count() >= 20);
}

#[test]
fn unknown_backend_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "--backend", "ibmq_nowhere", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn malformed_levels_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("levels.json");
    std::fs::write(&p, r#"{"schema_version": 1, "levels": "nope"}"#).unwrap();
    let o = bin(&["exact", "--levels", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = bin(&["exact", "--levels", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn e0_on_statevector() {
    let o = bin(&["e0", "--backend", "statevector"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sv = v["statevector_mev"].as_f64().unwrap();
    assert!((v["mean_mev"].as_f64().unwrap() - sv).abs() < 1e-12);
    assert!(sv > -0.218534, "initial ansatz below the exact correlation energy");
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(bin(&["run", "--shots", "many"]).status.code(), Some(1));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
}
