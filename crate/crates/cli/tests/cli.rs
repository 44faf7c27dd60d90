use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use causal_entropy::model::{parse_structure, Dag};
use causal_entropy::polyhedron::marginal_cone;
use causal_entropy::scenarios::builtin;

fn centropy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_centropy")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn emit(name: &str, dir: &Path) -> String {
    let out = centropy(&["scenario", name, "--emit"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let path = dir.join(format!("{name}.dag"));
    fs::write(&path, stdout(&out)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn emitted_structure_validates() {
    let dir = tempfile::tempdir().unwrap();
    let file = emit("triangle", dir.path());
    let out = centropy(&["validate", &file]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "ok\n");
}

#[test]
fn invalid_structure_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.dag");
    fs::write(&path, "system A classical\nop f in {A} out {B}\n").unwrap();
    let out = centropy(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("violation: undeclared system `B`"), "{}", stdout(&out));
}

#[test]
fn parse_errors_carry_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.dag");
    fs::write(&path, "system A classical\nprepare {A,\n").unwrap();
    let out = centropy(&["cone", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2, column"), "{}", stderr(&out));
}

#[test]
fn unreadable_file_is_a_domain_error() {
    let out = centropy(&["validate", "/nonexistent/structure.dag"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error: /nonexistent/structure.dag"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(centropy(&[]).status.code(), Some(2));
    assert_eq!(centropy(&["scan", "--scenario", "ic2", "--ineq", "IC_tight", "--step", "0.1"]).status.code(), Some(2));
    assert_eq!(centropy(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn emitted_cone_matches_the_library_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let file = emit("triangle-classical", dir.path());
    let ieq = dir.path().join("triangle.ieq");
    let out = centropy(&["cone", &file, "--marginal-only", "--ieq", ieq.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let structure = parse_structure(&fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(structure, builtin("triangle-classical").unwrap());
    let cone = marginal_cone(&Dag::new(&structure).unwrap());
    let expected: String =
        cone.system.rows().iter().map(|r| format!("{}\n", r.format(cone.system.index()))).collect();
    assert_eq!(stdout(&out), expected);
    assert_eq!(expected.lines().count(), 16);
    let porta = fs::read_to_string(&ieq).unwrap();
    assert!(porta.contains("DIM = 7") && porta.contains("INEQUALITIES_SECTION"));

    let grouped = stdout(&centropy(&["cone", &file]));
    assert!(grouped.starts_with("# 16 marginal rows: 9 polymatroid, 7 causal in 3 orbits\n"), "{grouped}");
}

#[test]
fn check_writes_a_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let file = emit("ic2", dir.path());
    let cert = dir.path().join("tight.cert");
    let out = centropy(&["check", &file, "--ineq", "IC_tight", "--cert", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("valid\n"));
    assert!(fs::read_to_string(&cert).unwrap().starts_with("verdict valid\npart 1\ny "));

    let out = centropy(&["check", &file, "--ineq", "I(X1:X2) <= 0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("not_implied\n"));
    let default = format!("{file}.cert");
    assert!(fs::read_to_string(default).unwrap().contains("\nh X1 "));
}

#[test]
fn unknown_names_and_non_coexisting_terms_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let file = emit("ic2-dense", dir.path());
    let out = centropy(&["check", &file, "--ineq", "IC_bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown inequality name `IC_bogus`"));
    let out = centropy(&["check", &file, "--ineq", "H(M,Y1) >= 0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("non-coexisting subset {M, Y1}"), "{}", stderr(&out));
    let out = centropy(&["check", &file, "--ineq", "H(M,) >= 0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("column"), "{}", stderr(&out));
}

#[test]
fn eval_on_a_perfectly_correlated_triple() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corr3.json");
    let p = ["1/2", "0", "0", "0", "0", "0", "0", "1/2"];
    let json = format!(r#"{{"vars":[["V1",2],["V2",2],["V3",2]],"p":{p:?}}}"#);
    fs::write(&path, json).unwrap();
    let out = centropy(&["eval", "--dist", path.to_str().unwrap(), "--ineq", "monogamy(3,1)"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), "slack +1\n");
    let out = centropy(&["eval", "--dist", path.to_str().unwrap(), "--ineq", "I(V1:V2) <= H(V3)"]);
    assert_eq!(stdout(&out), "slack +0\n");
}

#[test]
fn scan_prints_csv() {
    let out = centropy(&["scan", "--scenario", "ic2", "--ineq", "IC_original", "--step", "1/8"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# candidate=IC_original, protocol=van-dam, step=1/8\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 10);
    assert_eq!(centropy(&["scan", "--scenario", "triangle", "--ineq", "IC_tight", "--step", "1/8"]).status.code(), Some(1));
}

#[test]
fn scenario_summary_and_unknown_name() {
    let out = centropy(&["scenario", "triangle"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("triangle: 9 systems, 1 marginal contexts"));
    assert_eq!(centropy(&["scenario", "square"]).status.code(), Some(1));
}

#[test]
fn rays_of_the_classical_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let file = emit("triangle-classical", dir.path());
    let out = centropy(&["rays", &file]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("DIM = 7\n\nCONE_SECTION\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with('(')).count(), 10);
}
