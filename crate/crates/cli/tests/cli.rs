use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn semdis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semdis")).args(args).output().expect("binary runs")
}

fn path(name: &str) -> String {
    corpus(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn compile_lists_tagged_clauses() {
    let out = semdis(&["compile", &path("guarded_g.trs")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with('[')).count(), 7, "{text}");
}

#[test]
fn check_accepts_a_model() {
    let out = semdis(&["check", &path("ex1.trs"), "--model", &path("ex1.model"), "--query", "REACHABLE(a, b)"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn check_reports_a_refuted_model() {
    let out = semdis(&["check", &path("ex1.trs"), "--model", &path("ex1.model"), "--query", "REACHABLE(b, a)"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_sorted_system() {
    let out = semdis(&[
        "check",
        &path("websight.trs"),
        "--sorted",
        "--model",
        &path("websight.model"),
        "--query",
        "FEASIBLE(wwv05(u) == submit(u))",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn disprove_writes_a_certificate_that_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("ex1.cert");
    let cert_s = cert.display().to_string();
    let out = semdis(&["disprove", &path("ex1.trs"), "--query", "REACHABLE(a, b)", "-o", &cert_s]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&cert).unwrap().contains("verified"));
}

#[test]
fn disprove_symbolic_non_cycling() {
    let out = semdis(&["disprove", &path("cb.trs"), "--query", "CYCLING()", "--backend", "symbolic"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn query_file_flag() {
    let out = semdis(&[
        "check",
        &path("division.trs"),
        "--model",
        &path("division.model"),
        "--query-file",
        &path("division.query"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn derivable_goal_has_no_disproof() {
    let out = semdis(&["disprove", &path("ex1.trs"), "--query", "REACHABLE(b, a)", "--timeout", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn derive_prints_depth_tagged_atoms() {
    let out = semdis(&["derive", &path("ex1.trs"), "--size", "2", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().any(|l| l.starts_with('1') && l.contains("b -> a")), "{}", stdout(&out));
}

#[test]
fn bad_inputs_exit_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.model");
    std::fs::write(&broken, "domain = {0, 1}\nfun a = 7\n").unwrap();
    let out = semdis(&["check", &path("ex1.trs"), "--model", &broken.display().to_string(), "--query", "REACHABLE(a, b)"]);
    assert_eq!(out.status.code(), Some(3));

    let out = semdis(&["check", &path("ex1.trs"), "--model", &path("ex1.model"), "--query", "NOT a ->* b"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported"));
}
