use std::path::Path;
use std::process::{Command, Output};

use clap::Parser;
use spinbath::cli::{
    parse_config, read_manifest, Cli, EXIT_DIAGNOSTICS, EXIT_ERROR, SUMMARY_HEADER, TRAJECTORY_HEADER,
};

fn spinbath(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinbath"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

fn failure_line(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(stderr.lines().last().unwrap()).unwrap()
}

const RUN: [&str; 10] = [
    "--scenario",
    "antiferro-scan",
    "--n",
    "3",
    "--lambda",
    "0,2",
    "--tmax",
    "5",
    "--dt-out",
    "0.5",
];

#[test]
fn reruns_write_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = spinbath(&RUN, d.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let names = listing(a.path());
    assert_eq!(names, listing(b.path()));
    assert_eq!(
        names,
        [
            "antiferro-scan_N3_lambda0_kT0.02.csv",
            "antiferro-scan_N3_lambda2_kT0.02.csv",
            "antiferro-scan_N3_summary.csv",
            "antiferro-scan_manifest.toml",
        ]
    );
    for name in &names {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(spinbath(&RUN, dir.path()).status.code(), Some(0));
    let traj = std::fs::read_to_string(dir.path().join("antiferro-scan_N3_lambda2_kT0.02.csv")).unwrap();
    let lines: Vec<&str> = traj.lines().collect();
    assert_eq!(lines[0], TRAJECTORY_HEADER);
    assert_eq!(lines.iter().filter(|l| **l == TRAJECTORY_HEADER).count(), 1);
    // Grid 0, 0.5, ..., 5.
    assert_eq!(lines.len() - 1, 11);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 6));
    assert!(lines[1].starts_with("0.00000000000e0,"));
    let summary = std::fs::read_to_string(dir.path().join("antiferro-scan_N3_summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], SUMMARY_HEADER);
    assert_eq!(lines.len(), 3);
}

#[test]
fn manifest_reproduces_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        "scenario = \"ferro-scan\"\nN = 3\nlambda = [-2.0]\nM = 4\ndist = \"box\"\nseed = 12\ntmax = 4.0\n",
    )
    .unwrap();
    let args = [
        "--config",
        cfg_path.to_str().unwrap(),
        "--kt",
        "0.3,1.5",
        "--dt-out",
        "0.25",
    ];
    let out = spinbath(&args, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let expected = parse_config(&Cli::parse_from(std::iter::once("spinbath").chain(args))).unwrap();
    let text = std::fs::read_to_string(dir.path().join("ferro-scan_manifest.toml")).unwrap();
    assert_eq!(read_manifest(&text).unwrap(), expected);
    let table: toml::Table = text.parse().unwrap();
    for key in [
        "truncation_bound",
        "ratio_r",
        "max_norm_drift",
        "max_energy_drift",
        "solver_method",
    ] {
        assert!(table.contains_key(key), "{key}");
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, "scenario = \"temp-scan\"\nN = 3\ntemperature = 2.0\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = spinbath(&["--config", cfg_path.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
    let line = failure_line(&out);
    assert_eq!(line["kind"], "config");
    assert!(line["message"].as_str().unwrap().contains("temperature"));
    assert!(!out_dir.exists());
}

#[test]
fn diagnostics_outside_bounds_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        "scenario = \"sigma-x-spectrum\"\nN = 4\nresidual_tol = 1e-30\n",
    )
    .unwrap();
    let out = spinbath(&["--config", cfg_path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(EXIT_DIAGNOSTICS));
    let line = failure_line(&out);
    assert_eq!(line["kind"], "diagnostics");
    assert!(line["failures"][0].as_str().unwrap().contains("residual"));
    assert!(listing(dir.path()).iter().all(|n| !n.ends_with(".tmp")));
}

#[test]
fn runtime_errors_leave_no_files() {
    let dir = tempfile::tempdir().unwrap();
    // A file where the output directory should be.
    let blocked = dir.path().join("blocked");
    std::fs::write(&blocked, "").unwrap();
    let out = spinbath(&["--scenario", "sigma-x-spectrum", "--n", "3"], &blocked.join("sub"));
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
    assert_eq!(failure_line(&out)["kind"], "io");
    assert_eq!(listing(dir.path()), ["blocked"]);
}
