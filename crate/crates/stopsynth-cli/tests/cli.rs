use std::path::PathBuf;
use std::process::Command;

use stopsynth_cli::{
    main_with_args, Outcome, EXIT_INDETERMINATE, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE,
};

const TINY: &str = "\
processing Sense { period 4 in Raw out Filtered }
processing Act { period 8 in Filtered out Cmd }
wcet Sense 1
wcet Act 3
thread Fast { period 4 offset 0 deadline 3 maf 8 priority 1 run Sense when 0 mod 1 }
thread Slow { period 8 offset 2 deadline 8 maf 8 priority 2 run Act when 0 mod 1 }
reactivity Loop { path Raw -> Sense -> Act -> Cmd bound 12 }
";

fn file(name: &str, text: &str) -> String {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn tiny() -> String {
    file("tiny.sys", TINY)
}

fn run(args: &[&str]) -> Outcome {
    main_with_args(std::iter::once("stopsynth").chain(args.iter().copied()))
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["--help"]).code, EXIT_OK);
    assert_eq!(run(&["check"]).code, EXIT_USAGE);
    assert_eq!(run(&["check", "--frobnicate", &tiny()]).code, EXIT_USAGE);
    let missing = run(&["check", "/nonexistent/x.sys"]);
    assert_eq!(missing.code, EXIT_USAGE);
    assert!(missing.stderr.contains("/nonexistent/x.sys"));
    let broken = file("broken.sys", "processing P { period 4 }\nthread {\n");
    let out = run(&["check", &broken]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(
        out.stderr.starts_with(&format!("{broken}:2:")),
        "{}",
        out.stderr
    );
    let out = run(&["check", "--set", "speed=3", &tiny()]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("speed"));
    assert_eq!(
        run(&["check", "--reactivities", "Nope", &tiny()]).code,
        EXIT_USAGE
    );
}

#[test]
fn check_verdicts_and_exit_codes() {
    let t = tiny();
    let ok = run(&["check", &t]);
    assert_eq!(
        (ok.code, ok.stdout.as_str()),
        (EXIT_OK, "schedulable\n"),
        "{}",
        ok.stderr
    );
    let tight = run(&[
        "check",
        "--reactivities",
        "none",
        "--set",
        "deadlineFast=1/2",
        &t,
    ]);
    assert_eq!(
        (tight.code, tight.stdout.as_str()),
        (EXIT_NEGATIVE, "unschedulable\n")
    );
    let slow_chain = run(&[
        "check",
        "--set",
        "offsetSlow=0",
        "--reactivities",
        "Loop",
        "--set",
        "deadlineSlow=7",
        &t,
    ]);
    assert_eq!(slow_chain.code, EXIT_OK, "{}", slow_chain.stdout);
    let json = run(&["check", "--format", "json", "--compositional", &t]);
    let doc: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    assert_eq!(doc["mode"], "compositional");
    assert_eq!(doc["verdict"], "schedulable");
    let open = file("open.sys", &TINY.replace("wcet Act 3", "wcet Act ?"));
    let out = run(&["check", &open]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("wcetAct"), "{}", out.stderr);
}

#[test]
fn synth_reports_regions() {
    let t = tiny();
    let out = run(&[
        "synth",
        "--free",
        "deadlineFast",
        "--reactivities",
        "none",
        &t,
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.contains("exact: true"));
    // Sense needs one unit, so the deadline must be at least 1.
    assert!(
        out.stdout.contains("good: 1 <= deadlineFast"),
        "{}",
        out.stdout
    );
    let capped = run(&["synth", "--free", "deadlines", "--max-states", "3", &t]);
    assert_eq!(capped.code, EXIT_INDETERMINATE);
    assert!(capped.stdout.contains("exact: false"));
    let json = run(&[
        "synth",
        "--free",
        "deadlineFast",
        "--format",
        "json",
        "--reactivities",
        "none",
        &t,
    ]);
    let doc: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    assert_eq!(doc["exact"], true);
    assert_eq!(doc["mode"], "monolithic");
}

#[test]
fn compare_monolithic_and_compositional() {
    let t = tiny();
    let closed = run(&["compare", &t]);
    assert_eq!(closed.code, EXIT_OK, "{}", closed.stdout);
    assert!(closed.stdout.ends_with("equal: true\n"));
    let open = run(&["compare", "--free", "deadlineSlow", &t]);
    assert_eq!(open.code, EXIT_OK, "{}", open.stdout);
}

#[test]
fn simulate_and_gantt() {
    let t = tiny();
    let out = run(&["simulate", &t]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.contains("deadline misses: 0"));
    assert!(out.stdout.contains("Loop: worst latency"), "{}", out.stdout);
    let json = run(&["simulate", "--format", "json", "--horizon", "16", &t]);
    let doc: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    assert_eq!(doc["horizon"], "16");
    assert!(doc["segments"].as_array().is_some_and(|s| !s.is_empty()));
    let gantt = run(&["gantt", "--quantum", "1/2", "--reactivities", "none", &t]);
    assert!(
        gantt.stdout.lines().any(|l| l.starts_with("Fast ")),
        "{}",
        gantt.stdout
    );
    let svg = run(&["gantt", "--format", "svg", &t]);
    assert!(svg.stdout.starts_with("<svg"));
    assert_eq!(run(&["gantt", "--quantum", "0", &t]).code, EXIT_USAGE);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_stopsynth");
    let t = tiny();
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let ok = status(&["check", "--reactivities", "none", &t]);
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&ok.stdout), "schedulable\n");
    let bad = status(&[
        "check",
        "--reactivities",
        "none",
        "--set",
        "deadlineFast=1/2",
        &t,
    ]);
    assert_eq!(bad.status.code(), Some(EXIT_NEGATIVE));
    assert_eq!(status(&["nope"]).status.code(), Some(EXIT_USAGE));
}
