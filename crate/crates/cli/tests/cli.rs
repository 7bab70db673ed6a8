use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn amalgam(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amalgam"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn toy_variance_is_a_quarter() {
    let dir = tempfile::tempdir().unwrap();
    let o = amalgam(dir.path(), &["variance", "--input", fixture("toy.csv").to_str().unwrap(), "--out-dir", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("TotLogVar (centred logratios): 0.250000"));
    assert!(stdout(&o).contains("wrote out/variance.json"));
    let doc = read_json(&dir.path().join("out/variance.json"));
    assert!((doc["total_clr"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((doc["total_pairs"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(doc["n_pairs"], 1);
}

#[test]
fn constant_table_warns_with_zero_total() {
    let dir = tempfile::tempdir().unwrap();
    let o = amalgam(dir.path(), &["variance", "--input", fixture("constant.csv").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning: total logratio variance is zero"));
    let doc = read_json(&dir.path().join("amalgam-out/variance.json"));
    assert_eq!(doc["total_clr"].as_f64().unwrap(), 0.0);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = amalgam(dir.path(), &["variance", "--input", fixture("all_zero_column.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`b`"), "{}", stderr(&o));

    std::fs::write(dir.path().join("bad.csv"), "g,a,b\nw,1,2\nw,1,x\n").unwrap();
    let o = amalgam(dir.path(), &["variance", "--input", "bad.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 3, column 3"), "{}", stderr(&o));

    let o = amalgam(dir.path(), &["variance", "--input", fixture("toy.csv").to_str().unwrap(), "--closure", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn degenerate_selection_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = amalgam(
        dir.path(),
        &["select", "--input", fixture("constant.csv").to_str().unwrap(), "--candidates", "all"],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn hierarchy_trace_and_definitions() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("synthetic.csv");
    let h = fixture("synthetic_hierarchy.json");
    let o = amalgam(
        dir.path(),
        &["select", "--input", input.to_str().unwrap(), "--hierarchy", h.to_str().unwrap(), "--out-dir", "out"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("C/A"));
    assert!(out.contains("(manual)"));
    let csv = std::fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,chosen,additional_pct,cumulative_pct,tie_set,manual");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("2,B/A,"));
    let defs = read_json(&dir.path().join("out/definitions.json"));
    assert_eq!(defs.as_array().unwrap().len(), 3);
    assert_eq!(defs[2]["within"], "B");
    let fit = read_json(&dir.path().join("out/regression.json"));
    let last: f64 = lines[3].split(',').nth(3).unwrap().parse().unwrap();
    assert!((fit["explained_pct"].as_f64().unwrap() - last).abs() < 1e-9);
}

#[test]
fn empty_hierarchy_gives_a_single_zero_row() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("h.json"), r#"{"nodes": []}"#).unwrap();
    let o = amalgam(
        dir.path(),
        &["select", "--input", fixture("synthetic.csv").to_str().unwrap(), "--hierarchy", "h.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].trim_end().ends_with("0.0"));
}

#[test]
fn sibling_violation_names_the_logratio() {
    let dir = tempfile::tempdir().unwrap();
    let mut h = read_json(&fixture("synthetic_hierarchy.json"));
    h["slrs"].as_array_mut().unwrap().push(serde_json::json!({"step": 4, "num": "B34", "den": "A"}));
    std::fs::write(dir.path().join("h.json"), h.to_string()).unwrap();
    let o = amalgam(
        dir.path(),
        &["select", "--input", fixture("synthetic.csv").to_str().unwrap(), "--hierarchy", "h.json"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("B34/A"), "{}", stderr(&o));
}

#[test]
fn stepwise_candidates_with_hierarchy_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = amalgam(
        dir.path(),
        &[
            "select",
            "--input",
            fixture("synthetic.csv").to_str().unwrap(),
            "--hierarchy",
            fixture("synthetic_hierarchy.json").to_str().unwrap(),
            "--candidates",
            fixture("synthetic_candidates.txt").to_str().unwrap(),
            "--steps",
            "2",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = read_json(&dir.path().join("amalgam-out/trace.json"));
    assert!(trace["base_pct"].as_f64().unwrap() > 0.0);
    assert_eq!(trace["steps"].as_array().unwrap().len(), 2);
}

#[test]
fn ordinations_write_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("synthetic.csv");
    let h = fixture("synthetic_hierarchy.json");
    let o = amalgam(dir.path(), &["ordinate", "--input", input.to_str().unwrap(), "--mode", "lra", "--out-dir", "lra"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("dims 1+2:"));
    let coords = std::fs::read_to_string(dir.path().join("lra/coords.csv")).unwrap();
    assert!(coords.starts_with("label,group,dim1,dim2"));
    assert_eq!(coords.lines().count(), 25);

    let o = amalgam(
        dir.path(),
        &["ordinate", "--input", input.to_str().unwrap(), "--mode", "ternary", "--hierarchy", h.to_str().unwrap(), "--target", "roots", "--out-dir", "tern"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("tern/ordination.json"));
    assert_eq!(doc["mode"], "ternary");
    assert_eq!(doc["vertices"], serde_json::json!(["A", "B", "C"]));

    let o = amalgam(
        dir.path(),
        &["ordinate", "--input", input.to_str().unwrap(), "--mode", "pca-slr", "--hierarchy", h.to_str().unwrap(), "--out-dir", "pca"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("pca/ordination.json"));
    assert_eq!(doc["mode"], "biplot");
    assert_eq!(doc["variables"].as_array().unwrap().len(), 3);
}

#[test]
fn ternary_on_parts_is_a_shape_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = amalgam(
        dir.path(),
        &["ordinate", "--input", fixture("synthetic.csv").to_str().unwrap(), "--mode", "ternary"],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = amalgam(dir.path(), &["ordinate", "--input", fixture("synthetic.csv").to_str().unwrap(), "--mode", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}
