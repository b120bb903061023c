use std::process::Command;

use modlab::harness::{run, ExperimentKind, ExperimentSpec};
use modlab::Error;

fn modlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_modlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn body(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn cli_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = modlab(&[
            "simulate",
            "--m",
            "24",
            "--snr",
            "-1,1",
            "--lambda",
            "0.25,0.5",
            "--trials",
            "300",
            "--seed",
            "9",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let (a, b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("# seed: 9"));
    assert!(
        text.contains("snr_db,lambda,m,trials,errors,ber,ci_low,ci_high,bound_kind,bound_value")
    );
    assert_eq!(body(&text).lines().count(), 1 + 4);
}

#[test]
fn stdout_matches_library_output() {
    let out = modlab(&["bounds", "--m", "64", "--snr", "0,2", "--lambda", "0.5"]);
    assert!(out.status.success());
    let mut spec = ExperimentSpec::new(ExperimentKind::BoundsTable);
    spec.m = 64;
    spec.snr_db = vec![0.0, 2.0];
    spec.lambda = vec![0.5];
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        run(&spec).unwrap().to_csv()
    );
}

#[test]
fn seeds_change_simulation_bodies() {
    let mut spec = ExperimentSpec::new(ExperimentKind::BerSweep);
    spec.m = 16;
    spec.snr_db = vec![0.0];
    spec.trials = 300;
    let a = run(&spec).unwrap();
    spec.seed = 1;
    let b = run(&spec).unwrap();
    assert_ne!(a.body(), b.body());
}

#[test]
fn json_spec_and_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    let out_path = dir.path().join("fp.csv");
    std::fs::write(
        &spec_path,
        format!(
            r#"{{"kind": "fixed-point-plot", "snr_db": [0], "output": {:?}}}"#,
            out_path.to_str().unwrap()
        ),
    )
    .unwrap();
    assert!(modlab(&["run", spec_path.to_str().unwrap()])
        .status
        .success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("snr_db,c,x,r_c,x_star"));

    let config = modlab::multilevel::allocate_rates(4.0, 2, 16, 0.25).unwrap();
    let config_path = dir.path().join("ml.json");
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    let out = modlab(&[
        "multilevel",
        "--config",
        config_path.to_str().unwrap(),
        "--trials",
        "20",
        "--iters",
        "5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        body(&text)
            .lines()
            .filter(|l| l.contains(",frozen,"))
            .count(),
        2
    );
}

#[test]
fn invalid_input_is_reported_with_its_field() {
    let out = modlab(&["simulate", "--snr", "0", "--lambda", "1.2", "--trials", "5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda[0]"));

    let mut spec = ExperimentSpec::new(ExperimentKind::BerSweep);
    assert!(matches!(run(&spec), Err(Error::InvalidField { path, .. }) if path == "snr_db"));
    spec.snr_db = vec![0.0];
    spec.trials = 0;
    assert!(matches!(run(&spec), Err(Error::InvalidField { path, .. }) if path == "trials"));
}
