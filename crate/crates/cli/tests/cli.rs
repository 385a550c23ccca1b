use std::process::{Command, Output};

fn yangw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yangw")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is a JSON report")
}

#[test]
fn hojo_passes() {
    let o = yangw(&["check", "hojo", "--q", "3,3", "--depth", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    assert_eq!(r["suite"], "hojo");
    assert!(r["instances"].as_array().unwrap().iter().all(|i| i["status"] == "pass"));
}

#[test]
fn small_min_is_usage_error() {
    assert_eq!(code(&yangw(&["check", "hojo", "--q", "2,2", "--depth", "2"])), 2);
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(code(&yangw(&["check", "nonsense"])), 2);
    assert_eq!(code(&yangw(&["check", "hojo", "--q", "x"])), 2);
    assert_eq!(code(&yangw(&["check", "ope-lemma", "--mutate"])), 2);
    assert_eq!(code(&yangw(&["check", "yang-coproduct", "--sign", "*"])), 2);
}

#[test]
fn d0_kernel_passes() {
    assert_eq!(code(&yangw(&["check", "d0-kernel", "--q", "4,3", "--v", "1"])), 0);
}

#[test]
fn mutation_fails_with_witness() {
    let o = yangw(&["check", "hojo", "--q", "3,3", "--depth", "2", "--mutate"]);
    assert_eq!(code(&o), 1);
    let r = report(&o);
    let bad: Vec<_> = r["instances"].as_array().unwrap().iter().filter(|i| i["status"] == "fail").collect();
    assert!(!bad.is_empty());
    assert!(bad.iter().all(|i| i["witness"].is_string() && i["lhs"].is_string() && i["rhs"].is_string()));
}

#[test]
fn reports_are_deterministic() {
    let strip = |o: &Output| {
        let mut r = report(o);
        r.as_object_mut().unwrap().remove("wall_time");
        r.to_string()
    };
    let args = ["check", "miura-split", "--q", "3,3", "--w", "1", "--depth", "1"];
    let a = yangw(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_yangw")).args(args).env("YANGW_WORKERS", "1").output().unwrap();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn out_file_and_suite_aliases() {
    let path = std::env::temp_dir().join(format!("yangw-cli-test-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let o = yangw(&["check", "parabolic", "--q", "3,3", "--w", "1", "--depth", "2", "--out", p]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(r["suite"], "parabolic-compat");
    assert_eq!(r["params"]["w"], 1);
}

#[test]
fn extended_literal_fails() {
    let ok = yangw(&["check", "extended", "--side", "R", "--m", "3", "--add", "1", "--xmax", "1", "--depth", "2"]);
    assert_eq!(code(&ok), 0);
    let lit = yangw(&["check", "extended", "--side", "L", "--m", "3", "--add", "1", "--xmax", "1", "--literal"]);
    assert_eq!(code(&lit), 1);
}

#[test]
fn bad_worker_count() {
    let o = Command::new(env!("CARGO_BIN_EXE_yangw")).args(["check", "ope-lemma"]).env("YANGW_WORKERS", "0").output().unwrap();
    assert_eq!(code(&o), 2);
}
