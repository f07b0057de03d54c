use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nvk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nvk"))
        .args(args)
        .output()
        .expect("spawn nvk")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn vacuum_run_exits_zero_with_zero_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("vacuum.conf");
    let out = nvk(&["run", "--config", arg(&cfg), "--out", arg(dir.path())]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mut rows = 0;
    for line in lines {
        rows += 1;
        for (name, v) in header.iter().zip(line.split(',')) {
            let v: f64 = v.parse().unwrap();
            if *name != "t" {
                assert!(v == 0.0, "{name} = {v}");
            }
        }
    }
    assert_eq!(rows, 21);
    assert!(dir.path().join("snapshot_000020.nvkn").exists());
    assert!(dir.path().join("profile_final.csv").exists());
}

#[test]
fn baseline_run_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("baseline.conf");
    let out = nvk(&[
        "run",
        "--config",
        arg(&cfg),
        "--out",
        arg(dir.path()),
        "--snapshot-stride",
        "20",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(!stdout.contains("FAIL"));
    let csv = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 44);
    for step in [0, 20, 40, 43] {
        assert!(
            dir.path().join(format!("snapshot_{step:06}.nvkn")).exists(),
            "{step}"
        );
    }
}

#[test]
fn cfl_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(
        &cfg,
        "x_min = -12\nx_max = 12\nnx = 241\ndt = 0.2\nt_final = 1\nprofile = vacuum\n",
    )
    .unwrap();
    let out = nvk(&["run", "--config", arg(&cfg), "--out", arg(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CflViolation"));
}

#[test]
fn unreadable_config_exits_two() {
    let out = nvk(&["run", "--config", "/nonexistent/nvk.conf"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_thread_runs_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.conf");
    fs::write(
        &cfg,
        "x_min = -8\nx_max = 8\nnx = 161\nt_final = 0.5\nsample_np = 8\nprofile = gaussian-bump\nprofile.phi0_amplitude = -0.05\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = nvk(&["run", "--config", arg(&cfg), "--out", arg(d)]);
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["diagnostics.csv", "profile_final.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let snap = |d: &Path| {
        let name = fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .find(|p| p.extension().is_some_and(|e| e == "nvkn"))
            .unwrap();
        fs::read(name).unwrap()
    };
    assert_eq!(snap(&a), snap(&b));
}

#[test]
fn verify_flow_default_catalog_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = nvk(&["verify-flow", "--out", arg(dir.path())]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let csv = fs::read_to_string(dir.path().join("flowcheck.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(csv.lines().filter(|l| l.starts_with("jacobian,")).count() == 80);
}

#[test]
fn verify_flow_catches_wrong_jacobian_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let out = nvk(&[
        "verify-flow",
        "--fields",
        "linear-in-time",
        "--jacobian-exponent",
        "2",
        "--out",
        arg(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_flow_empty_catalog_gives_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = nvk(&["verify-flow", "--fields", "none", "--out", arg(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("flowcheck.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn ladder_on_vacuum_has_zero_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("vacuum.conf");
    let out = nvk(&[
        "ladder",
        "--config",
        arg(&cfg),
        "--n",
        "2,4,8",
        "--out",
        arg(dir.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("ladder_pairs.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    for line in csv.lines().skip(1) {
        for v in line.split(',').skip(2) {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn ladder_on_baseline_runs_three_rungs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("baseline.conf");
    let out = nvk(&[
        "ladder",
        "--config",
        arg(&cfg),
        "--n",
        "4,8,16",
        "--out",
        arg(dir.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let rungs = fs::read_to_string(dir.path().join("ladder_rungs.csv")).unwrap();
    assert_eq!(rungs.lines().count(), 4);
    let pairs = fs::read_to_string(dir.path().join("ladder_pairs.csv")).unwrap();
    assert_eq!(pairs.lines().count(), 3);
    let series = fs::read_to_string(dir.path().join("ladder_mu_l2.dat")).unwrap();
    assert_eq!(series.lines().count(), 2);
}

#[test]
fn ladder_needs_two_rungs() {
    let cfg = configs().join("vacuum.conf");
    let out = nvk(&["ladder", "--config", arg(&cfg), "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least two rungs"));
}

#[test]
fn schema_lists_every_key() {
    let out = nvk(&["print-config-schema"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for key in [
        "nx",
        "mollifier_n",
        "deposition",
        "profile.radius",
        "snapshot_stride",
    ] {
        assert!(text.lines().any(|l| l.starts_with(key)), "{key}");
    }
}
