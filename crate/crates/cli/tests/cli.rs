use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn expsum(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expsum"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

/// File name -> sha256 of its contents.
fn digests(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let bytes = fs::read(&path).unwrap();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        out.insert(path.file_name().unwrap().to_string_lossy().into_owned(), hex);
    }
    out
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bounds_for_two_variables_three_extra_terms() {
    let tmp = TempDir::new().unwrap();
    let o = expsum(tmp.path(), &["bounds", "--n", "2", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("theorem1 = 13"));
    let o = expsum(tmp.path(), &["--json", "bounds", "--n", "2", "--k", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["rows"][0]["theorem1"], 13);
    assert_eq!(v["rows"][0]["outer"], 10);
    assert_eq!(v["rows"][0]["simplicial_refined"], 12);
}

#[test]
fn bounds_table_is_markdown() {
    let tmp = TempDir::new().unwrap();
    let o = expsum(tmp.path(), &["bounds", "--table", "2", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("| ")).count(), 7);
}

#[test]
fn missing_spectrum_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    let o = expsum(tmp.path(), &["contour", "--spectrum", "missing.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.txt"));
}

#[test]
fn parse_errors_name_line_and_column() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.txt"), "2 3\n0 1 0 4 1\n0 0 x 1 4\n").unwrap();
    let o = expsum(tmp.path(), &["gale", "--spectrum", "bad.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3, column 3"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(expsum(tmp.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(expsum(tmp.path(), &["bounds"]).status.code(), Some(1));
    assert_eq!(expsum(tmp.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn reproduce_checks_pass() {
    let tmp = TempDir::new().unwrap();
    for case in ["pentagon", "parallelogram", "circles"] {
        let o = expsum(tmp.path(), &["--quiet", "reproduce", case]);
        assert_eq!(o.status.code(), Some(0), "{case}: {}", stderr(&o));
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(tmp.path().join(case).join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["pass"], true);
        assert_eq!(manifest["schema_version"], "1");
    }
    let chambers: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("pentagon/chambers.json")).unwrap()).unwrap();
    let counts: Vec<usize> = chambers["maps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["chambers"].as_array().unwrap().len())
        .collect();
    assert_eq!(counts, [2, 2, 3, 2, 2]);
    let csvs = fs::read_dir(tmp.path().join("pentagon"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".csv"))
        .count();
    assert_eq!(csvs, 5);
}

#[test]
fn reruns_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [a.path(), b.path()] {
        assert_eq!(expsum(dir, &["--quiet", "--out-dir", "out", "reproduce", "circles"]).status.code(), Some(0));
        fs::write(dir.join("out/pentagon.txt"), "2 3\n0 1 0 4 1\n0 0 1 1 4\n").unwrap();
        let o = expsum(
            dir,
            &["--quiet", "--seed", "3", "--out-dir", "gale", "gale", "--spectrum", "out/pentagon.txt", "--lines", "5"],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(digests(&a.path().join("out")), digests(&b.path().join("out")));
    assert_eq!(digests(&a.path().join("gale")), digests(&b.path().join("gale")));
    assert!(digests(&a.path().join("gale")).contains_key("manifest.json"));
}

#[test]
fn unstable_chambers_are_an_assertion_failure() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("p.txt"), "2 3\n0 1 0 4 1\n0 0 1 1 4\n").unwrap();
    // At 200 cells the smallest chamber only appears after two doublings.
    let o = expsum(tmp.path(), &["chambers", "--spectrum", "p.txt", "--sigma", "+--++", "--grid", "200"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("assertion failed"));
    let o = expsum(tmp.path(), &["chambers", "--spectrum", "p.txt", "--sigma", "+--++"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("3 chambers (1 inner)"));
}

#[test]
fn components_of_the_circles() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(expsum(tmp.path(), &["--quiet", "--out-dir", ".", "reproduce", "circles"]).status.code(), Some(0));
    fs::write(tmp.path().join("par.txt"), "2 3\n0 1 0 2 0\n0 0 1 0 2\n").unwrap();
    for (file, n) in [("g1.txt", 1), ("g2.txt", 0)] {
        let o = expsum(tmp.path(), &["--json", "components", "--spectrum", "par.txt", "--coeffs", file]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["count"], n);
        assert_eq!(v["stabilized"], true);
    }
    let o = expsum(
        tmp.path(),
        &["path", "--spectrum", "par.txt", "--from", "g2.txt", "--to", "g1.txt", "--steps", "30"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("N: 0 -> 1"));
}
