use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use torus_bundle::exact::{QMat, Q};
use torus_bundle::io::parse_input;
use torus_bundle::orbifold::conjugation_data;

const STANDARD: &str = "m = 1\nd = 1\nA = [[[0, 1], [-1, 0]], [[0, 0], [0, 0]]]\n";

fn inputs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../inputs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torusbundle")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn machine(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("machine output is JSON")
}

#[test]
fn check_bundle_on_the_standard_datum() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "standard.toml", STANDARD);
    let o = run(&["check-bundle", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("nondegenerate: true, pfaffian-reality: true\n"), "{}", stdout(&o));
}

#[test]
fn degenerate_datum_fails_the_check() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "zero.toml", "m = 1\nd = 1\nA = [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]\n");
    let o = run(&["check-bundle", &path, "--format", "machine"]);
    assert_eq!(o.status.code(), Some(1));
    let report = machine(&o);
    assert_eq!(report["status"], "fail");
    let failed: Vec<&Value> = report["conditions"].as_array().unwrap().iter().filter(|c| c["holds"] == false).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["label"], "nondegenerate");
}

#[test]
fn certify_the_central_quadric() {
    let path = inputs().join("quadric.toml");
    let o = run(&["certify", path.to_str().unwrap(), "--samples", "8", "--format", "machine"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = machine(&o);
    assert_eq!(report["data"]["component_count"], 1);
    assert_eq!(report["data"]["witnesses"].as_array().unwrap().len(), 8);
    assert!(report["summary"].as_str().unwrap().contains("component_count = 1"));
}

#[test]
fn non_antisymmetric_matrix_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "bad.toml", "m = 1\nd = 1\nA = [[[0, 2], [1, 0]], [[0, 0], [0, 0]]]\n");
    let o = run(&["check-bundle", &path]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("A[0][0][1]") && err.contains("(0, 1)"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_command_is_rejected_before_reading() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("does-not-exist.toml");
    let o = run(&["frobnicate", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("frobnicate") && !err.contains("No such file"), "{err}");
}

#[test]
fn missing_file_and_missing_section_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let o = run(&["solve", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let path = write(&dir, "standard.toml", STANDARD);
    let o = run(&["check-real", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[real]"), "{}", stderr(&o));
}

#[test]
fn syntax_error_reports_the_line() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "syntax.toml", "m = 1\nd = 1\nA = [[[0, 1], [-1, 0]\n");
    let o = run(&["check-bundle", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn failed_integral_condition_is_cited_by_label() {
    // A₁ fixes the standard component while A₂ reverses the orientation of the base
    let text = format!("{STANDARD}[real]\nA1 = [[1, 0], [0, -1]]\nA2 = [[1, 0], [0, -1]]\n");
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "real.toml", &text);
    let o = run(&["check-real", &path]);
    assert_eq!(o.status.code(), Some(1));
    let line = stdout(&o).lines().find(|l| l.starts_with("integral-3")).map(str::to_string).unwrap();
    assert!(line.contains("NO"), "{line}");
}

#[test]
fn kodaira_example_passes_every_check() {
    let path = inputs().join("kodaira.toml");
    for cmd in ["check-bundle", "check-real", "decompose", "solve", "sample", "certify", "reconstruct"] {
        let o = run(&[cmd, path.to_str().unwrap(), "--samples", "5"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}{}", stdout(&o), stderr(&o));
    }
}

#[test]
fn reports_are_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let path = inputs().join("quadric.toml");
    let outs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("cert{i}.json"));
            let o = run(&["certify", path.to_str().unwrap(), "--seed", "7", "--samples", "6", "--format", "machine", "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0));
            assert!(o.stdout.is_empty());
            std::fs::read(out).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    let other = run(&["certify", path.to_str().unwrap(), "--seed", "8", "--samples", "6", "--format", "machine"]);
    assert_ne!(other.stdout, outs[0]);
}

#[test]
fn sampling_an_empty_system_fails() {
    let text = "m = 2\nd = 1\n[blocks]\na_plus = 1\na_minus = -1\nD = [[0, 0], [0, 0]]\n\
                L_pp = [0, 0]\nL_pm = [0, 0]\nL_mp = [0, 0]\nL_mm = [0, 0]\n";
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "empty.toml", text);
    let o = run(&["sample", &path]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["solve", &path, "--format", "machine"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(machine(&o)["data"]["dimension"], Value::Null);
}

fn toml_vec(v: &[Q]) -> String {
    format!("[{}]", v.iter().map(|x| format!("\"{x}\"")).collect::<Vec<_>>().join(", "))
}

fn toml_mat(m: &QMat) -> String {
    format!("[{}]", (0..m.nrows()).map(|i| toml_vec(&m.row(i))).collect::<Vec<_>>().join(", "))
}

#[test]
fn reconstruct_from_conjugation_section() {
    let text = std::fs::read_to_string(inputs().join("kodaira.toml")).unwrap();
    let input = parse_input(&text).unwrap();
    let real = input.real.unwrap();
    let conj = conjugation_data(&real, input.datum.as_ref().unwrap(), None).unwrap();
    let translations: Vec<String> = conj.generator_translations.iter().map(|t| toml_vec(t)).collect();
    let section = format!(
        "{STANDARD}[conjugation]\nA1 = {}\nA2 = {}\nd2 = {}\ngenerator_translations = [{}]\nsquare_translation = {}\n",
        toml_mat(&conj.a1),
        toml_mat(&conj.a2),
        toml_vec(&conj.d2),
        translations.join(", "),
        toml_vec(&conj.square_translation)
    );
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "conj.toml", &section);
    let o = run(&["reconstruct", &path, "--format", "machine"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = machine(&o);
    let field = |k: &str| report["fields"].as_array().unwrap().iter().find(|f| f["key"] == k).unwrap()["value"].clone();
    assert_eq!(field("source"), "conjugation");
    assert_eq!(field("d1"), serde_json::json!(["0", "1/2"]));
    assert_eq!(field("A1"), serde_json::json!([["-1", "0"], ["0", "1"]]));
}
