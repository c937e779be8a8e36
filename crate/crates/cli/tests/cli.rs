use std::process::{Command, Output};

fn bailey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bailey")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn list_prints_the_registry() {
    let out = bailey(&["list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for key in ["wp-inverse", "thm-1413c", "lift3-probe"] {
        assert!(text.lines().any(|l| l.starts_with(key)), "{key} missing");
    }
}

#[test]
fn json_reports_are_reproducible() {
    let args = ["verify", "lemma2", "theta-square", "--json", "--no-timing", "--seed", "9"];
    let (a, b) = (bailey(&args), bailey(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let lines: Vec<serde_json::Value> = stdout(&a).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 6);
    for v in &lines {
        assert_eq!(v["status"], "pass");
        for field in ["identity", "point", "order", "max_n", "ms"] {
            assert!(v.get(field).is_some(), "{field} missing");
        }
    }
}

#[test]
fn controls_fail_as_expected() {
    let out = bailey(&["verify", "rogers-delta", "--control", "--points", "2", "--no-timing"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("2/2 reports failed as expected"));
}

#[test]
fn unknown_identity_is_a_usage_error() {
    let out = bailey(&["verify", "no-such-identity"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tree_paths_report_pass_and_fail() {
    let good = bailey(&["tree", "--path", "T1e,T3e", "--max-n", "3", "--order", "12", "--json", "--no-timing"]);
    assert!(good.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&good).trim()).unwrap();
    assert_eq!(v["identity"], "tree:unit>T1e>T3e");
    let mixed = bailey(&["tree", "--path", "T1,T1e", "--max-n", "2"]);
    assert_eq!(mixed.status.code(), Some(1));
}

#[test]
fn probe_reports_the_cubic_law() {
    let out = bailey(&["probe-lift3", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["unique"], "a^n");
    assert!(bailey(&["probe-lift3", "--candidates", "other"]).status.code() == Some(2));
}
