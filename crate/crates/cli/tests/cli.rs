use std::path::Path;
use std::process::{Command, Output};

fn trapdoor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trapdoor"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bound_prints_the_headline_numbers() {
    let o = trapdoor(&["bound", "-n", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("S = 5/2, C_up = 0.660964 b/u"), "{text}");
    assert!(text.contains("0.694242"), "{text}");
    assert!(text.contains("zero-error capacity = 0.5 b/u"), "{text}");
}

#[test]
fn bound_json() {
    let o = trapdoor(&["bound", "-n", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["S"], "5/2^1");
    assert_eq!(v["d_negative_indices"], serde_json::json!([1, 2]));
    assert_eq!(v["n"], 2);
}

#[test]
fn enumerate_101() {
    let o = trapdoor(&["enumerate", "-i", "101", "-s", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("5 outputs"), "{text}");
    assert!(!text.contains("110"), "{text}");
    let o = trapdoor(&["enumerate", "-i", "101", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["outputs"].as_array().unwrap().len(), 5);
}

#[test]
fn verify_passes() {
    let o = trapdoor(&["verify", "--max-n", "8"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("[PASS]")).count() >= 15);
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(trapdoor(&["bogus"]).status.code(), Some(2));
    assert_eq!(trapdoor(&["enumerate", "-i", "10x"]).status.code(), Some(2));
    assert_eq!(
        trapdoor(&["bound", "-n", "2", "-s", "7"]).status.code(),
        Some(2)
    );
    assert_eq!(trapdoor(&["bound", "-n", "0"]).status.code(), Some(2));
    assert_eq!(
        trapdoor(&["matrix", "-n", "2", "--format", "pgm"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn caps_come_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_trapdoor"))
        .args(["matrix", "-n", "4"])
        .env("TRAPDOOR_MATRIX_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap of 3"));
}

#[test]
fn matrix_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q3.csv");
    let o = trapdoor(&[
        "matrix",
        "-n",
        "3",
        "--inverse",
        "--format",
        "csv",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let (header, m) = trapdoor_core::io::read_matrix_csv_file(&path).unwrap();
    assert_eq!(header.dim, 8);
    let p = trapdoor_core::build_channel_matrix(3, trapdoor_core::State::Zero).unwrap();
    assert_eq!(m, trapdoor_core::invert_channel_matrix(&p));
}

#[test]
fn entropy_and_omega_agree() {
    let o = trapdoor(&["entropy", "-n", "3", "-s", "1"]);
    assert!(stdout(&o).contains("recursion agrees with definition: yes"));
    let o = trapdoor(&["omega", "-n", "4"]);
    assert!(stdout(&o).contains("agrees with -P⁻¹h: yes"));
}

#[test]
fn ba_report() {
    let o = trapdoor(&["ba", "-n", "2", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let gap = v["gap_to_bound"].as_f64().unwrap();
    assert!((gap - 0.1609640474).abs() < 1e-6);
    assert!(v["iterations"].as_u64().unwrap() > 0);
    let o = trapdoor(&["ba", "-n", "4", "--tol", "1e-14", "--max-iter", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn images_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pgm");
    let b = dir.path().join("b.pgm");
    for p in [&a, &b] {
        let o = trapdoor(&["sierpinski", "--resolution", "5", "-o", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(read(&a), read(&b));
    assert!(read(&a).starts_with(b"P5\n32 32\n255\n"));

    let png = dir.path().join("t.png");
    let o = trapdoor(&[
        "fractal",
        "-n",
        "4",
        "-s",
        "1",
        "--format",
        "png",
        "--mode",
        "binary",
        "-o",
        png.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(read(&png).starts_with(b"\x89PNG"));

    let o = trapdoor(&["fractal", "-n", "1", "--mode", "binary"]);
    assert_eq!(o.stdout, b"P5\n2 2\n255\n\xff\x00\xff\xff");
}
