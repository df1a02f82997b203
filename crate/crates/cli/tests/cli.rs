use std::path::PathBuf;
use std::process::{Command, Output};

use noether2::io::ResultDocument;

fn corpus(name: &str) -> PathBuf {
    [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "..",
        "corpus",
        &format!("{name}.n2"),
    ]
    .iter()
    .collect()
}

fn n2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_n2"))
        .args(args)
        .output()
        .expect("n2 runs")
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("n2-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn corpus_files_exit_zero() {
    for name in ["wave", "area_preserving", "lattice_kdv", "shallow_water"] {
        let path = corpus(name);
        for cmd in ["el", "relation", "claw", "verify"] {
            let out = n2(&[cmd, path.to_str().unwrap()]);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{cmd} {name}: {}",
                String::from_utf8_lossy(&out.stdout)
            );
        }
    }
}

#[test]
fn json_is_byte_identical_for_a_seed() {
    let path = corpus("mkg_continuous");
    let args = [
        "verify",
        path.to_str().unwrap(),
        "--format",
        "json",
        "--seed",
        "17",
        "--trials",
        "50",
    ];
    let a = n2(&args);
    let b = n2(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc = ResultDocument::from_json(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert_eq!(doc.config.seed, 17);
    assert_eq!(doc.config.trials, 50);
    assert!(doc.ok);
}

#[test]
fn nonzero_residual_exits_one() {
    let text = std::fs::read_to_string(corpus("lattice_kdv"))
        .unwrap()
        .replace("multiplier 1: nu", "multiplier 1: nu + u[1,0]");
    let path = scratch("kdv_perturbed.n2", &text);
    let out = n2(&["verify", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = ResultDocument::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(doc.residuals[0].verdict.counterexample.is_some());
}

#[test]
fn golden_mismatch_exits_one() {
    let text = std::fs::read_to_string(corpus("wave"))
        .unwrap()
        .replace("expect euler u: u_tt - u_xx", "expect euler u: u_tt + u_xx");
    let path = scratch("wave_wrong_golden.n2", &text);
    let out = n2(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("FAILED: expected euler u differs"),
        "{stdout}"
    );
}

#[test]
fn usage_and_parse_errors_exit_two() {
    let bad = scratch(
        "bad.n2",
        "kind: continuous\nvars: x, t\nfields: u\nlagrangian: u_{\n",
    );
    let out = n2(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("4:16: expected axis name"), "{stderr}");

    assert_eq!(
        n2(&["verify", "/nonexistent/file.n2"]).status.code(),
        Some(2)
    );
    assert_eq!(n2(&["frobnicate"]).status.code(), Some(2));
    let wave = corpus("wave");
    assert_eq!(
        n2(&["verify", wave.to_str().unwrap(), "--trials", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        n2(&["verify", wave.to_str().unwrap(), "--tol", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        n2(&["verify", wave.to_str().unwrap(), "--format", "xml"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn strict_flux_comparison() {
    let path = corpus("wave");
    let out = n2(&["verify", path.to_str().unwrap(), "--expect-strict"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("expect flux x: ok") && stdout.contains("expect flux t: ok"));
}
