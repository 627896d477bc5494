//! Black-box tests of the binary: output shapes, the 0/1/2 exit-code
//! contract, and seed-determinism of campaign reports.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_radial-gram"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmpfile(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("radial-gram-test-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

#[test]
fn reduce_examples() {
    let out = run(&["reduce", "g1^1 g1^-1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "e");

    let out = run(&["reduce", "g1^2 g1^-1 g2"]);
    assert_eq!(stdout(&out).trim(), "g1 g2");
}

#[test]
fn length_examples() {
    let out = run(&["length", "--p", "2", "--squared", "g1^2 g2^-1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "5");

    let out = run(&["length", "--p", "1", "--squared", "g1^2 g2^-3"]);
    assert_eq!(stdout(&out).trim(), "5");
}

#[test]
fn embed_json_shape() {
    let out = run(&["embed", "--format", "json", "g1^2 g2^-1"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out).trim(),
        r#"{"coeffs":[{"key":"g1","c":2},{"key":"g1^2 g2","c":-1}]}"#
    );
}

#[test]
fn parse_errors_exit_2() {
    let out = run(&["reduce", "h1^2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["length", "--p", "0", "g1"]);
    assert_eq!(out.status.code(), Some(2));

    // clap usage errors share the same code
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["certify", "--theorem", "thm-9.9", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_builtin_profiles() {
    let words = tmpfile(
        "chain.txt",
        "e\ng1\ng1 g2\ng1 g2 g3\ng1 g2 g3 g4\n",
    );
    let words = words.to_str().unwrap();
    let out = run(&["check", "--words", words, "--profile", "parity", "--mode", "pd"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    let out = run(&["check", "--words", words, "--profile", "length", "--mode", "cnd"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    // squared length is CND but certainly not PD on this chain
    let out = run(&["check", "--words", words, "--profile", "length", "--mode", "pd"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn negative_controls_exit_1() {
    let words = tmpfile("chain2.txt", "e\ng1\ng1 g2\ng1 g2 g3\n");
    let words = words.to_str().unwrap();
    // atom outside [-1, 1]: phi(g) = 2^{sq length} is rejected
    let profile = tmpfile(
        "bad-profile.json",
        r#"{"kind":"pd-z","mu":{"atoms":[{"loc":2.0,"w":1.0}]}}"#,
    );
    let out = run(&[
        "check",
        "--words",
        words,
        "--profile",
        profile.to_str().unwrap(),
        "--mode",
        "pd",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));

    // |m_1| > m_0 is infeasible
    let moments = tmpfile("bad-moments.json", r#"{"m":[1.0,2.0]}"#);
    let out = run(&["moments", moments.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("infeasible"));

    let good = tmpfile("good-moments.json", r#"{"m":[1.0,0.0,1.0,0.0]}"#);
    let out = run(&["moments", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn recover_round_trip() {
    let moments = tmpfile("rec-moments.json", r#"{"m":[1.0,0.0,1.0,0.0]}"#);
    let out = run(&["recover", moments.to_str().unwrap(), "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains(r#""loc": -1.0"#) && text.contains(r#""loc": 1.0"#), "{text}");

    let infeasible = tmpfile("rec-bad.json", r#"{"m":[1.0,2.0]}"#);
    let out = run(&["recover", infeasible.to_str().unwrap(), "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn family_verifies() {
    let spec = tmpfile(
        "family.json",
        r#"{"space":"free-int","N":3,"targets":[2,3]}"#,
    );
    let out = run(&["family", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verified family"));

    let bad = tmpfile("family-bad.json", r#"{"space":"free-int","N":1,"targets":[2]}"#);
    let out = run(&["family", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn certify_deterministic_and_seeded() {
    let a = run(&[
        "certify", "--theorem", "prop-4.1", "--trials", "5", "--seed", "42", "--format", "csv",
    ]);
    assert_eq!(a.status.code(), Some(0));
    let b = run(&[
        "certify", "--theorem", "prop-4.1", "--trials", "5", "--seed", "42", "--format", "csv",
    ]);
    assert_eq!(a.stdout, b.stdout, "same seed must give byte-identical reports");

    let c = run(&[
        "certify", "--theorem", "lemma-3.2", "--trials", "5", "--seed", "43", "--format", "csv",
    ]);
    assert_eq!(c.status.code(), Some(0));
    let csv = stdout(&c);
    assert!(csv.starts_with("trial,theorem,statistic,value,threshold,pass\n"), "{csv}");

    // env var fallback for the seed
    let mut cmd = bin();
    cmd.args(["certify", "--theorem", "prop-4.1", "--trials", "5", "--format", "csv"])
        .env("RADIAL_GRAM_SEED", "42");
    let d = cmd.output().unwrap();
    assert_eq!(a.stdout, d.stdout, "env seed must match the flag");
}

#[test]
fn certify_smoke_all_tags() {
    for tag in [
        "thm-1.2", "thm-1.3", "prop-4.1", "prop-4.2", "lemma-3.2", "cor-3.3", "thm-4.5",
        "thm-4.6", "cor-4.9", "cor-4.10", "sec-4.3",
    ] {
        let out = run(&["certify", "--theorem", tag, "--trials", "1", "--seed", "7"]);
        assert_eq!(out.status.code(), Some(0), "{tag}: {}", stdout(&out));
        assert!(stdout(&out).contains("PASS"), "{tag}");
    }
}
