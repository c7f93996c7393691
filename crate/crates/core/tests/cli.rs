//! End-to-end runs of the `hjlab` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hjlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_into(dir: &Path, sub: &str, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec![sub, "--out", out];
    args.extend_from_slice(extra);
    hjlab(&args)
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

#[test]
fn repeated_runs_are_byte_identical() {
    for (sub, extra) in [
        ("solve-hj", vec!["dx=1/16", "dt=1/64"]),
        ("seminorm", vec!["dx=1/16", "dt=1/32", "samples=1000"]),
        ("ldiff", vec!["samples=2000"]),
        ("blowup", vec![]),
    ] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        assert!(run_into(a.path(), sub, &extra).status.success(), "{sub}");
        assert!(run_into(b.path(), sub, &extra).status.success(), "{sub}");
        let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
        assert!(!fa.is_empty(), "{sub} wrote no tables");
        assert_eq!(fa, fb, "{sub}");
    }
}

#[test]
fn maxreg_sweep_writes_one_row_per_cell() {
    let dir = TempDir::new().unwrap();
    let out = run_into(
        dir.path(),
        "sweep-maxreg",
        &["qs=1.6,2.4,3", "epsilons=1/4,1/8,1/16", "dxs=1/64"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.path().join("maxreg.csv")).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 9);
    let hash = text
        .lines()
        .nth(1)
        .unwrap()
        .trim_start_matches("# config_hash: ");
    assert!(rows
        .iter()
        .all(|r| r.starts_with(hash) && r.split(',').count() == 10));

    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("subcommand=sweep-maxreg"));
    assert!(manifest.contains(&format!("config_hash={hash}")));
    assert!(manifest.contains("q0=2"));
    assert!(manifest.contains("status=ok"));
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# coarse run\ndx = 1/8\ndt = 1/32 # step\nsamples = 500\n",
    )
    .unwrap();
    let with_file = dir.path().join("a");
    let out = hjlab(&[
        "ldiff",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        with_file.to_str().unwrap(),
        "seed=7",
    ]);
    assert!(out.status.success());
    let manifest = fs::read_to_string(with_file.join("manifest.txt")).unwrap();
    assert!(manifest.contains("seed=7"));
    assert!(manifest.contains("dx=0.125"), "{manifest}");
}

#[test]
fn exit_codes_follow_the_failure_class() {
    let dir = TempDir::new().unwrap();
    assert_eq!(hjlab(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        run_into(dir.path(), "solve-hj", &["gamma=2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run_into(dir.path(), "solve-hj", &["colour=blue"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run_into(dir.path(), "solve-hj", &["dx=abc"]).status.code(),
        Some(2)
    );

    let strict = run_into(dir.path(), "verify-duality", &["duality_tol=1e-12"]);
    assert_eq!(strict.status.code(), Some(1));

    let help = hjlab(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("sweep-maxreg"));
}

#[test]
fn oversized_selection_radius_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    // a selection radius larger than the domain is rejected before solving
    let out = run_into(dir.path(), "blowup", &["select_radius=4"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("error") || stderr.contains("failure"),
        "{stderr}"
    );
}

#[test]
fn selftest_passes() {
    let dir = TempDir::new().unwrap();
    let out = run_into(dir.path(), "selftest", &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = fs::read_to_string(dir.path().join("selftest.csv")).unwrap();
    assert!(data_rows(&text).len() >= 10);
}
