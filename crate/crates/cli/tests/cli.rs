use std::path::Path;
use std::process::{Command, Output};

use starcalc::batch::CORPUS;

fn starcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starcalc")).args(args).output().expect("binary runs")
}

fn corpus_text(name: &str) -> &'static str {
    CORPUS.iter().find(|(n, _)| *n == name).expect("corpus entry").1
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_passing_recipe() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "x.json", corpus_text("X_noether"));
    let out = starcalc(&["run", &file]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("== X_noether [PASS]"));
}

#[test]
fn run_failing_expectation_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let text = corpus_text("Z_between").replace("\"chi_h\": 5, \"c1sq\": 3", "\"chi_h\": 5, \"c1sq\": 4");
    let file = write(dir.path(), "z.json", &text);
    let out = starcalc(&["run", &file]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("[FAIL] geography"));
}

#[test]
fn parse_and_schema_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.json", "{ \"schema\": 1, ");
    let out = starcalc(&["run", &broken]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let short = corpus_text("X_noether").replace("[1, 0, 0, 0, 0, 0, 0]", "[1, 0, 0, 0, 0, 0]");
    let short = write(dir.path(), "short.json", &short);
    let out = starcalc(&["run", &short]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema violation"));

    assert_eq!(starcalc(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn batch_exit_codes() {
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(starcalc(&["batch", empty.path().to_str().unwrap()]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.json", corpus_text("T_noether"));
    write(dir.path(), "b.json", corpus_text("M_above"));
    let d = dir.path().to_str().unwrap();
    assert_eq!(starcalc(&["batch", d, "--jobs", "2"]).status.code(), Some(0));

    write(dir.path(), "c.json", &corpus_text("R_above").replace("\"euler\": 55", "\"euler\": 54"));
    let out = starcalc(&["batch", d]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("failed: ") && stdout(&out).contains("c.json"));
}

#[test]
fn corpus_machine_output_is_byte_identical() {
    let a = starcalc(&["corpus", "--machine"]);
    let b = starcalc(&["corpus", "--machine", "--jobs", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["summary"]["passed"], v["summary"]["total"]);
}

#[test]
fn strict_corpus_fails_on_discrepancy() {
    let out = starcalc(&["corpus", "--strict"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("Y_between"));
}

#[test]
fn chart_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["X_noether", "Y_between", "R_above"] {
        write(dir.path(), &format!("{name}.json"), corpus_text(name));
    }
    let out_dir = tempfile::tempdir().unwrap();
    let csv = out_dir.path().join("chart.csv");
    let svg = out_dir.path().join("chart.svg");
    let out = starcalc(&[
        "chart",
        dir.path().to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(
        text,
        "name,chi_h,c1sq,position\nR_above,5,5,above_noether\nX_noether,5,4,on_noether\nY_between,6,4,strictly_between\n"
    );
    assert!(std::fs::read_to_string(svg).unwrap().contains("<circle"));
}
