use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn propvote(args: &[&str]) -> (i32, String, String) {
    let Output { status, stdout, stderr } =
        Command::new(env!("CARGO_BIN_EXE_propvote")).args(args).output().expect("binary runs");
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

fn line<'a>(out: &'a str, key: &str) -> &'a str {
    out.lines().find_map(|l| l.strip_prefix(key)).unwrap_or_else(|| panic!("no `{key}` in\n{out}"))
}

#[test]
fn run_phragmen_example() {
    let (code, out, _) = propvote(&["run", "--rule", "phragmen", "--input", &fixture("example21.txt")]);
    assert_eq!(code, 0);
    assert_eq!(line(&out, "committee: "), "1,2,4,5");
    let times: Vec<&str> = out.lines().filter_map(|l| l.split("time=").nth(1)?.split(' ').next()).collect();
    assert_eq!(times, ["5/16", "19/32", "101/128", "283/256"]);
}

#[test]
fn run_rule_x_example() {
    let (code, out, _) = propvote(&["run", "--rule", "rulex", "--input", &fixture("example22.txt")]);
    assert_eq!(code, 0);
    assert_eq!(line(&out, "committee: "), "1,2,3,4");
}

#[test]
fn run_pav_example() {
    let (code, out, _) = propvote(&["run", "--rule", "pav", "--input", &fixture("phragmen1899.txt")]);
    assert_eq!(code, 0);
    assert!(out.contains("7850"), "{out}");
}

#[test]
fn run_is_deterministic_and_json_agrees() {
    let args = ["run", "--rule", "rulex", "--input", &fixture("intro.txt")];
    let (_, a, _) = propvote(&args);
    let (_, b, _) = propvote(&args);
    assert_eq!(a, b);
    let (code, json, _) = propvote(&["--json", "run", "--rule", "rulex", "--input", &fixture("intro.txt")]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["committee"].as_str().unwrap(), line(&a, "committee: "));
    assert_eq!(v["rule"], "rulex");
}

#[test]
fn check_priceable_passes() {
    let (code, out, _) = propvote(&[
        "check", "--axiom", "priceable", "--input", &fixture("intro.txt"),
        "--committee", "1,2,3,7,8,10,11,13,14,4,5,6",
    ]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(line(&out, "verdict: "), "PASS");
}

#[test]
fn check_core_fails_with_witness() {
    let (code, out, _) = propvote(&[
        "check", "--axiom", "core", "--input", &fixture("intro.txt"),
        "--committee", "1,2,3,7,8,9,10,11,12,13,14,15",
    ]);
    assert_eq!(code, 1);
    assert_eq!(line(&out, "verdict: "), "FAIL");
    assert!(line(&out, "witness: ").starts_with("S={1,2,3}"));
}

#[test]
fn check_laminar_passes() {
    let (code, out, _) = propvote(&["check", "--axiom", "laminar", "--input", &fixture("example31.txt")]);
    assert_eq!(code, 0);
    assert_eq!(line(&out, "verdict: "), "PASS");
}

#[test]
fn malformed_input_exits_2() {
    let dir = std::env::temp_dir().join(format!("propvote-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "3 2\n1\n").unwrap();
    let (code, _, err) = propvote(&["run", "--rule", "pav", "--input", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"));
    let (code, _, _) = propvote(&["run", "--rule", "pav", "--input", dir.join("missing.txt").to_str().unwrap()]);
    assert_eq!(code, 2);
    let (code, _, _) = propvote(&[
        "check", "--axiom", "pjr", "--input", &fixture("intro.txt"), "--committee", "1,99",
    ]);
    assert_eq!(code, 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exhausted_budget_exits_3() {
    let (code, _, err) =
        propvote(&["run", "--rule", "pav", "--input", &fixture("phragmen1899.txt"), "--budget", "3"]);
    assert_eq!(code, 3);
    assert!(err.contains("budget"));
}

#[test]
fn search_reports_none_for_sound_pairs() {
    for v in ["pigou-dalton+pav", "core2+pav", "ejr+rulex"] {
        let (code, out, _) =
            propvote(&["search", "--violation", v, "--max-n", "6", "--max-m", "6", "--max-k", "3", "--trials", "300"]);
        assert_eq!(code, 0);
        assert_eq!(line(&out, "result: "), "none found", "{v}");
    }
}

#[test]
fn search_finds_unpriceable_seqpav() {
    let args = ["search", "--violation", "priceable+seqpav", "--max-n", "10", "--max-m", "8", "--max-k", "5", "--seed", "3"];
    let (code, out, _) = propvote(&args);
    assert_eq!(code, 0);
    assert_eq!(line(&out, "result: "), "counterexample");
    // the emitted instance feeds back into `check`
    let text = out.split("instance:\n").nth(1).unwrap();
    let path = std::env::temp_dir().join(format!("propvote-found-{}.txt", std::process::id()));
    std::fs::write(&path, text).unwrap();
    let w = line(&out, "committee: ");
    let (code, _, _) = propvote(&["check", "--axiom", "priceable", "--input", path.to_str().unwrap(), "--committee", w]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(code, 1);
    assert_eq!(propvote(&args).1, out);
}

#[test]
fn unknown_violation_exits_2() {
    let (code, _, _) = propvote(&["search", "--violation", "bogus"]);
    assert_eq!(code, 2);
}
