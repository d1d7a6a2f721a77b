//! End-to-end runs of the `pamdecide` binary on the fixture corpus.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    let mut full = Vec::new();
    for a in args {
        // `@name` expands to a fixture path.
        full.push(a.strip_prefix('@').map(fixture).unwrap_or_else(|| a.to_string()));
    }
    Command::new(env!("CARGO_BIN_EXE_pamdecide")).args(&full).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn check(args: &[&str], first_line: &str, code: i32) {
    let o = run(args);
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap_or(""), first_line, "{args:?}\nstderr: {}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(o.status.code(), Some(code), "{args:?}");
}

#[test]
fn documented_examples() {
    check(&["reach", "--pam", "@intro.pam", "--from", "1/2", "--to", "2/9"], "yes n=3", 0);
    check(&["rotation", "--pam", "@gap1.pam"], "rho=1/2 q=2 cycle=1/6,5/6", 0);
    check(
        &["reach", "--pam", "@expanding.pam", "--from", "1/5", "--to", "1/7"],
        "unknown (non-injective; no hit ≤ 10000)",
        2,
    );
}

#[test]
fn exit_codes_follow_answers_on_the_corpus() {
    let cases: &[(&[&str], &str, i32)] = &[
        (&["reach", "--pam", "@intro.pam", "--from", "0.5", "--to", "0.2"], "no", 0),
        (&["reach", "--pam", "@bij.pam", "--from", "0", "--to", "7/9"], "yes n=2", 0),
        (&["reach", "--pam", "@bij.pam", "--from", "0", "--to", "1/2"], "no", 0),
        (&["reach", "--pam", "@gap1.pam", "--from", "0", "--to", "1/3"], "no", 0),
        (&["reach", "--pam", "@gap2.pam", "--from", "0", "--to", "2/3"], "yes n=1", 0),
        (&["reach", "--pam", "@gap2.pam", "--from", "1/2", "--to", "0"], "no", 0),
        (&["reach", "--pam", "@neg1.pam", "--from", "0", "--to", "31/64"], "yes n=2", 0),
        (&["periodic", "--pam", "@gap1.pam", "--x", "1/6"], "yes n=2", 0),
        (&["reach-interval", "--pam", "@gap1.pam", "--from", "0", "--interval", "[1/3,1/2)"], "no", 0),
        (&["interval-reach", "--pam", "@gap1.pam", "--from-interval", "[0,1/10]", "--to-interval", "[1/2,1)"], "yes n=1", 0),
        (&["rotation", "--pam", "@bij.pam"], "tau=irrational q1=2 q2=4/3", 0),
        (&["rotation", "--pam", "@bij_rational.pam"], "tau=1/2 q=2", 0),
        (&["rotation", "--pam", "@gap2.pam"], "rho=1/2 q=2 cycle=0,2/3", 0),
        (&["cycle", "--pam", "@gap1.pam"], "cycle=1/6,5/6 word=12 contraction=1/4", 0),
        (&["certify-infinite", "--pam", "@expanding.pam", "--from", "1/5"], "certified p=3 n0=1 v0=-1", 0),
        (&["probe", "--c", "1/2", "--d", "1/3", "--gamma", "1"], "witness n=1 value=1/3 lagrange_upper=2", 0),
        (&["halting", "--program", "@intro.loop"], "halts n=3", 0),
        (&["halting", "--program", "@bij_diverges.loop"], "diverges", 0),
        (&["halting", "--program", "@expanding.loop"], "unsupported: non-injective; no hit ≤ 10000", 2),
        (&["reach", "--pam", "@bij.pam", "--from", "0", "--to", "1/2", "--strategy", "simulate", "--horizon", "50"], "unknown (bijection; no hit ≤ 50)", 2),
    ];
    for (args, line, code) in cases {
        check(args, line, *code);
    }
}

#[test]
fn input_errors_exit_one() {
    for args in [
        &["reach", "--pam", "@intro.pam", "--from", "x", "--to", "1"][..],
        &["frobnicate"],
        &["reach", "--pam", "@missing.pam", "--from", "0", "--to", "1/2"],
        &["reach", "--pam", "@bad.pam", "--from", "0", "--to", "1/2"],
        &["reach", "--pam", "@intro.pam", "--from", "0", "--to", "1/2", "--strategy", "nope"],
        &["rotation", "--pam", "@expanding.pam"],
        &["halting", "--program", "@missing_else.loop"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stdout(&o));
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["reach", "--help"]).status.code(), Some(0));
}

#[test]
fn syntax_errors_carry_positions() {
    let o = run(&["halting", "--program", "@missing_else.loop"]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("at 2:"), "{err}");
}

#[test]
fn records_are_stable_json_lines() {
    let args = ["reach", "--pam", "@intro.pam", "--from", "1/2", "--to", "2/9", "--format", "records", "--trace"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    let mut lines = out.lines();
    let head: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(head["answer"], "yes");
    assert_eq!(head["witness"], "3");
    assert!(head["detail"].is_null());
    assert_eq!(head["trace_reference"], "classify>bijection>bijection");
    let steps: Vec<serde_json::Value> = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(steps.len(), 3);
    assert!(steps.iter().all(|s| s["trace_of"] == head["query"]));

    let unknown = run(&["reach", "--pam", "@expanding.pam", "--from", "1/5", "--to", "1/7", "--format", "records"]);
    let rec: serde_json::Value = serde_json::from_str(stdout(&unknown).trim()).unwrap();
    assert_eq!(rec["answer"], "unknown");
    assert_eq!(rec["detail"], "non-injective; no hit ≤ 10000");
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn human_trace_is_appended() {
    let o = run(&["reach", "--pam", "@gap1.pam", "--from", "0", "--to", "1/3", "--trace"]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "no");
    assert!(lines[1].starts_with("classify: "));
    assert!(lines.iter().any(|l| l.contains("threshold N = 4")), "{out}");
}

#[test]
fn simulate_emits_csv() {
    let o = run(&["simulate", "--pam", "@intro.pam", "--from", "1/2", "--steps", "3", "--digits", "4"]);
    assert_eq!(
        stdout(&o),
        "n,value,decimal,branch\n0,1/2,0.5000,2\n1,0,0.0000,1\n2,2/3,0.6667,2\n3,2/9,0.2222,1\n"
    );
    let h = run(&["simulate", "--pam", "@bij.pam", "--from", "0", "--steps", "1000", "--histogram", "3"]);
    let out = stdout(&h);
    let counts: u64 = out.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(out.lines().count(), 9);
    assert_eq!(counts, 1000);
}
