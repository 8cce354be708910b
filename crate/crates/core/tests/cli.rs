use std::path::{Path, PathBuf};
use std::process::Command;

use sant::cli::{run, Console};
use tempfile::TempDir;

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn sant(args: &[&str]) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut console = Console { out: &mut out, err: &mut err, color: false };
    let code = run(std::iter::once("sant").chain(args.iter().copied()), &mut console);
    Outcome { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn example(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name).display().to_string()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn bundled_models_validate() {
    for m in ["user.sant", "geo.sant", "tmi.sant"] {
        let r = sant(&["validate", &example(m)]);
        assert_eq!(r.code, 0, "{m}: {}", r.err);
        assert!(r.out.contains("0 error(s), 0 warning(s)"), "{}", r.out);
    }
}

#[test]
fn truncated_model_reports_position() {
    let dir = TempDir::new().unwrap();
    let full = std::fs::read_to_string(example("user.sant")).unwrap();
    let cut = &full[..full.find("activity Request").unwrap() + 20];
    let path = write(&dir, "cut.sant", cut);
    let r = sant(&["validate", &path]);
    assert_eq!(r.code, 1);
    let line = cut.lines().count();
    assert!(r.err.contains(&format!("cut.sant:{line}:")), "{}", r.err);
}

#[test]
fn real_case_count_is_a_sort_error() {
    let dir = TempDir::new().unwrap();
    let src = "template T;\nparam r : Real;\nplace P;\nactivity A timed { cases r; time exponential(1.0); }\narc P -> A;\ninit P = 1;\n";
    let path = write(&dir, "t.sant", src);
    let r = sant(&["validate", &path]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("error[SortMismatch] A:"), "{}", r.err);
    assert!(r.err.contains("t.sant:4:"), "diagnostic should point at the activity: {}", r.err);
}

#[test]
fn missing_parameter_is_a_user_error() {
    let dir = TempDir::new().unwrap();
    let asg = write(&dir, "a.sasg", "assignment OnlyS { s = {1, 2}; }\n");
    let r = sant(&["instantiate", &example("user.sant"), &asg]);
    assert_eq!(r.code, 1, "{}", r.err);
    assert!(r.err.contains("error[UnboundParameter] parameter `pb`"), "{}", r.err);
}

#[test]
fn instantiate_user_internal() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("u.sanx").display().to_string();
    let r = sant(&[
        "instantiate",
        &example("user.sant"),
        &example("users.sasg"),
        "--assignment",
        "UserInternal",
        "--out",
        &out,
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    let (san, _) = sant::formats::instance_from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let names: Vec<&str> = san.places.iter().map(|p| p.name.as_str()).collect();
    for n in ["Idle_1", "Req_1", "Req_6", "Req_7", "Dropped_1", "Failed_1"] {
        assert!(names.contains(&n), "{n} missing from {names:?}");
    }
    assert_eq!(san.activities[san.activity_id("Request").unwrap()].cases, 3);

    // the written instance is accepted by the other commands
    assert_eq!(sant(&["validate", &out]).code, 0);
    let r = sant(&["simulate", &out, "--reps", "2", "--horizon", "5"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("throughput(Request)"), "{}", r.out);
}

#[test]
fn instantiate_user_press_to_stdout() {
    let r = sant(&["instantiate", &example("user.sant"), &example("users.sasg"), "--assignment", "UserPress"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let (san, _) = sant::formats::instance_from_json(&r.out).unwrap();
    assert_eq!(san.activities[san.activity_id("Request").unwrap()].cases, 2);
    assert!(r.err.contains("User"), "summary goes to stderr: {}", r.err);
}

#[test]
fn ambiguous_assignment_needs_a_name() {
    let r = sant(&["instantiate", &example("user.sant"), &example("users.sasg")]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("UserInternal"), "{}", r.err);
    let r = sant(&["instantiate", &example("user.sant"), &example("users.sasg"), "--assignment", "Nobody"]);
    assert_eq!(r.code, 1);
}

#[test]
fn simulation_rejects_bad_configs() {
    let base = [example("geo.sant"), example("geo.sasg")];
    for extra in [["--horizon", "0"], ["--horizon", "-1"], ["--reps", "0"]] {
        let mut args = vec!["simulate", &base[0], &base[1], "--assignment", "Pair"];
        args.extend(extra);
        let r = sant(&args);
        assert_eq!(r.code, 1, "{extra:?}: {}", r.err);
    }
    let r = sant(&["simulate", &base[0], &base[1], "--assignment", "Pair", "--reward", "tokens(Nowhere_1)"]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("Nowhere_1"), "{}", r.err);
}

#[test]
fn simulation_report_is_reproducible() {
    let args = [
        "simulate",
        &example("geo.sant"),
        &example("geo.sasg"),
        "--assignment",
        "Pair",
        "--seed",
        "11",
        "--horizon",
        "200",
        "--reps",
        "5",
        "--reward",
        "up=prob(GEO_1>=1)",
        "--reward",
        "throughput(GEO_F)",
    ]
    .map(String::from);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let a = sant(&args);
    assert_eq!(a.code, 0, "{}", a.err);
    assert_eq!(a.out, sant(&args).out);
    assert!(a.out.lines().next().unwrap().starts_with("reward"));
    assert!(a.out.contains("up "), "{}", a.out);

    let mut json = args.clone();
    json.extend(["--format", "json"]);
    let r = sant(&json);
    let v: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v["rewards"][0]["name"], "up");
    assert_eq!(v["rewards"][0]["replications"], 5);
}

#[test]
fn simulating_a_template_needs_an_assignment() {
    let r = sant(&["simulate", &example("geo.sant")]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("assignment"), "{}", r.err);
}

#[test]
fn export_template_dot_marks_variability() {
    let r = sant(&["export", &example("geo.sant")]);
    assert_eq!(r.code, 0, "{}", r.err);
    let line = |id: &str| r.out.lines().find(|l| l.contains(id)).unwrap_or_else(|| panic!("{id}")).to_string();
    assert!(line("\"p:Working_S\" [").contains("dashed"));
    assert!(!line("\"p:GEO\" [").contains("dashed"));
    assert!(r.out.starts_with("digraph"));
}

#[test]
fn export_instance_dot_is_solid() {
    let r = sant(&["export", &example("geo.sant"), &example("geo.sasg"), "--assignment", "Triple"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(!r.out.contains("dashed"));
    assert!(r.out.contains("\"p:Working_S_3\""));
}

#[test]
fn export_json_round_trips() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("tmi.json").display().to_string();
    let r = sant(&["export", &example("tmi.sant"), "--format", "json", "--out", &out]);
    assert_eq!(r.code, 0, "{}", r.err);
    let back = sant::formats::template_from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(back, sant::formats::parse_model(&std::fs::read_to_string(example("tmi.sant")).unwrap()).unwrap());
    // JSON templates are accepted as input too
    assert_eq!(sant(&["validate", &out]).code, 0);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(sant(&["export", &example("geo.sant"), "--format", "svg"]).code, 1);
    assert_eq!(sant(&["frobnicate"]).code, 1);
    assert_eq!(sant(&[]).code, 1);
    assert_eq!(sant(&["simulate", "x.sanx", "--reward", "bogus"]).code, 1);
    assert_eq!(sant(&["validate", "/definitely/not/here.sant"]).code, 1);
    let help = sant(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.out.contains("simulate"));
}

#[test]
fn binary_exit_codes_and_color() {
    let bin = env!("CARGO_BIN_EXE_sant");
    let ok = Command::new(bin).args(["validate", &example("user.sant")]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));

    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.sant", "template T;\nplace P;\nactivity A timed { time exponential(1.0); }\ninit P = 1;\ninit Q = 2;\n");
    let run = |color: &str| Command::new(bin).args(["validate", &bad]).env("SANT_COLOR", color).output().unwrap();
    let plain = run("never");
    assert_eq!(plain.status.code(), Some(1));
    let text = String::from_utf8_lossy(&plain.stderr);
    assert!(text.contains("error[") && !text.contains('\x1b'), "{text}");
    let colored = run("always");
    assert_eq!(colored.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&colored.stderr).contains("\x1b["));

    let usage = Command::new(bin).arg("--bogus").output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
}
