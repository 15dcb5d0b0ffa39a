//! End-to-end tests of the `distfe` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn distfe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distfe")).args(args).output().expect("binary runs")
}

fn mesh_file(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../meshes").join(name).display().to_string()
}

#[test]
fn certify_json_has_the_report_keys() {
    let out = distfe(&["certify", "--mesh", "gen:criss-cross-square:1", "--kinds", "hessian-2d,divdiv0-2d"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        for key in ["mesh", "kind", "dims", "composites", "cohomology", "duality", "oracle", "runtime_s"] {
            assert!(r.get(key).is_some(), "missing `{key}` in {r}");
        }
        for c in r["cohomology"].as_array().unwrap() {
            for key in ["k", "dim", "rank_in", "rank_out", "computed", "expected", "pass"] {
                assert!(c.get(key).is_some(), "missing cohomology `{key}`");
            }
        }
    }
    assert_eq!(reports[0]["kind"], "hessian-2d");
}

#[test]
fn csv_flattens_the_cohomology_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = distfe(&[
        "certify",
        "--mesh",
        &mesh_file("triangle.txt"),
        "--kinds",
        "hessian-2d",
        "--format",
        "csv",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3);
    for col in ["mesh", "kind", "k", "computed", "expected", "pass"] {
        assert!(lines[0].split(',').any(|h| h == col), "header {} lacks {col}", lines[0]);
    }
}

#[test]
fn injected_fault_fails_certification() {
    let out = distfe(&["certify", "--mesh", "gen:square:1", "--kinds", "hessian-2d", "--fault", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports[0]["pass"], false);
}

#[test]
fn malformed_mesh_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "dim 2\nvertices 3\n0 0\n1 x\n0 1\ncells 1\n0 1 2\n").unwrap();
    let out = distfe(&["certify", "--mesh", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn kind_of_the_wrong_dimension_is_rejected() {
    let out = distfe(&["certify", "--mesh", "gen:cube:1", "--kinds", "hessian-2d"]);
    assert_eq!(out.status.code(), Some(2));
    let out = distfe(&["certify", "--mesh", "gen:cube:1", "--kinds", "no-such-complex"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mesh_gen_writes_a_file_and_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    let out = distfe(&["mesh", "gen", "--kind", "square-with-hole", "--res", "4", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "simplices [24, 48, 24] interior [0, 24, 24]");
    let info = distfe(&["mesh", "info", path.to_str().unwrap()]);
    let info: serde_json::Value = serde_json::from_slice(&info.stdout).unwrap();
    assert_eq!(info["betti"], serde_json::json!([1, 1, 0]));
}

#[test]
fn unknown_generator_is_rejected() {
    let out = distfe(&["mesh", "gen", "--kind", "torus", "--res", "2", "-o", "unused.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mesh_gen_needs_an_output_path() {
    let out = distfe(&["mesh", "gen", "--kind", "square", "--res", "1"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(!out.stderr.is_empty());
}

#[test]
fn flipped_sign_fails_certification() {
    let out =
        distfe(&["certify", "--mesh", "gen:criss-cross-square:1", "--kinds", "divdiv-2d", "--fault", "flip-sign"]);
    assert_eq!(out.status.code(), Some(1));
}
