use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus-dirac"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("TORUS_DIRAC_THREADS", "2")
        .output()
        .expect("spawn torus-dirac")
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn bessel_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bessel-verify"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("bessel-verify.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["seed"], 42);
    assert!(dir.path().join("bessel_wronskian.csv").exists());
}

#[test]
fn perturbed_k_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bessel-verify", "--perturb-k", "1e-6"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["kernel-check", "--nodes", "4"][..],
        &["schatten", "--p", "1.5"],
        &["q-residual", "--tol", "nonsense=1e-3"],
        &["q-residual", "--modes", "0,3"],
        &["no-such-command"],
    ] {
        let o = run(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    let o = run(&["kernel-check", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = Command::new(env!("CARGO_BIN_EXE_torus-dirac"))
        .args(["kernel-check", "--modes", "1,1", "--out"])
        .arg(dir.path())
        .env("TORUS_DIRAC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "node_count = 24\nmodes = [2, 3]\nseed = 5\n[tolerances]\nkernel = 1e-11\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["kernel-check", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("kernel-check.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["node_count"], 24);
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["modes"], serde_json::json!([2, 3]));
    assert_eq!(summary["gates"][0]["worst_case"]["tolerance"], 1e-11);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["q-residual", "--modes", "3,3", "--nodes", "24", "--fields", "2", "--seed", "11"];
    assert_eq!(run(&args, a.path()).status.code(), Some(0));
    assert_eq!(run(&args, b.path()).status.code(), Some(0));
    let fa = read_dir_sorted(a.path());
    assert!(!fa.is_empty());
    assert_eq!(fa, read_dir_sorted(b.path()));

    let c = tempfile::tempdir().unwrap();
    let mut other = args;
    other[8] = "12";
    assert_eq!(run(&other, c.path()).status.code(), Some(0));
    assert_ne!(fa, read_dir_sorted(c.path()));
}

#[test]
fn small_schatten_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["schatten", "--modes", "2,2", "--nodes", "16", "--p", "2.5,3.5"], dir.path());
    assert!(matches!(o.status.code(), Some(0 | 1)));
    let csv = std::fs::read_to_string(dir.path().join("schatten.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# torus-dirac schatten seed=42 node_count=16 modes=2,2"));
    assert_eq!(lines.next().unwrap(), "p,sum_m_n,sum_2m_2n,relative_change,stable");
    assert_eq!(lines.count(), 2);
}
