use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

const A3: &str = r#"{"mutable":3,"frozen":0,"b":[[0,1,0],[-1,0,1],[0,-1,0]]}"#;
const MARKOV: &str = "0 2 -2;-2 0 2;2 -2 0";

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mutclass"));
    cmd.env_remove("MUTCLASS_CACHE_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn mutate_a3_at_the_middle() {
    let dir = tempfile::tempdir().unwrap();
    let a3 = write(dir.path(), "a3.json", A3);
    let out = run(&["mutate", "--at", "2", &a3]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "3 0\n0 -1 1\n1 0 -1\n-1 1 0\n");
    // the text output parses back, and mutating again returns A3
    let cycle = write(dir.path(), "cycle.txt", &stdout(&out));
    let back = run(&["mutate", "--at", "2", &cycle, "--json"]);
    assert_eq!(json(&back)["matrix"], serde_json::from_str::<serde_json::Value>(A3).unwrap());
}

#[test]
fn embeds_a2_into_a3_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", r#"{"mutable":2,"frozen":0,"b":[[0,1],[-1,0]]}"#);
    let q = write(dir.path(), "q.json", A3);
    let out = run(&["embeds", &p, &q]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "YES\nupper_sequence []\nsubset [1, 2]\nlower_sequence []\n");
    let out = run(&["embeds", &p, &q, "--json"]);
    let v = json(&out);
    assert_eq!(v["verdict"], "YES");
    assert_eq!(v["witness"]["subset"], serde_json::json!([1, 2]));
    assert_eq!(v["budget"]["max_members"], 100000);
}

#[test]
fn markov_is_finite() {
    let out = run(&["finite", "--matrix", MARKOV]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "FINITE members=1\n");
}

#[test]
fn exit_codes_follow_the_verdict() {
    let out = run(&["embeds", "--matrix", "0 3;-3 0", "--matrix", MARKOV]);
    assert_eq!((out.status.code(), stdout(&out).as_str()), (Some(0), "NO\n"));
    // a mutation-infinite target with too small an entry cap
    let out = run(&["embeds", "--max-entry", "4", "--matrix", "0 5;-5 0", "--matrix", "0 3 -1;-3 0 2;1 -2 0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).starts_with("UNKNOWN"));
    let out = run(&["finite", "--no-infinite-exit", "--max-members", "10", "--matrix", "0 3 -3;-3 0 3;3 -3 0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn errors_are_one_line_with_exit_one() {
    for args in [
        &["finite", "--matrix", "0 1;1 0"][..],
        &["mutate", "--at", "4", "--matrix", "0 1;-1 0"],
        &["embeds", "--matrix", "0"],
        &["finite", "/nonexistent/matrix.json"],
        &["no-such-verb"],
        &["cache", "stats"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn json_output_feeds_back_as_input() {
    let dir = tempfile::tempdir().unwrap();
    let a3 = write(dir.path(), "a3.json", A3);
    for verb in [&["class"][..], &["finite"], &["mutate", "--at", "1"]] {
        let first = run(&[verb, &[a3.as_str(), "--json"]].concat());
        let mut child = bin()
            .args(["class", "-", "--json"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(&first.stdout).unwrap();
        let again = child.wait_with_output().unwrap();
        let direct = run(&["class", &a3, "--json"]);
        assert_eq!(json(&again)["key"], json(&direct)["key"], "{verb:?}");
    }
    // a saved universe reproduces its own closures
    let saved = write(dir.path(), "u.json", &stdout(&run(&["universe", "-r", "3", "-w", "3", "--json"])));
    let built = run(&["closure", "-r", "3", "-w", "3", &a3, "--json"]);
    let loaded = run(&["closure", "--universe", &saved, &a3, "--json"]);
    assert_eq!(json(&built)["result"], json(&loaded)["result"]);
    assert_eq!(json(&built)["result"].as_array().unwrap().len(), 4);
}

#[test]
fn seed_order_and_jobs_do_not_change_results() {
    let reference = stdout(&run(&["universe", "-r", "3", "-w", "2", "--json"]));
    for extra in [
        &["--seed-order", "descending"][..],
        &["--seed-order", "shuffled", "--shuffle-seed", "9"],
        &["--jobs", "1"],
        &["--jobs", "3", "--seed-order", "shuffled"],
    ] {
        let out = run(&[&["universe", "-r", "3", "-w", "2", "--json"][..], extra].concat());
        assert_eq!(stdout(&out), reference, "{extra:?}");
    }
}

#[test]
fn hasse_refuses_unknowns_unless_partial() {
    let out = run(&["hasse", "-r", "3", "-w", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).starts_with("UNKNOWN relation"));
    let out = run(&["hasse", "-r", "3", "-w", "2", "--partial", "--dot"]);
    assert_eq!(out.status.code(), Some(2));
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph mutation_classes {") && dot.contains("style=dashed"));
    let out = run(&["hasse", "-r", "2", "-w", "2", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["unknown"].as_array().unwrap().is_empty());
}

#[test]
fn topology_verbs() {
    let out = run(&["closure", "-r", "3", "-w", "2", "--matrix", "0 1;-1 0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 2);
    let out = run(&["open-set", "-r", "3", "-w", "2", "--matrix", MARKOV, "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"].as_array().unwrap().len(), 1);
    let out = run(&["closure", "-r", "2", "-w", "1", "--matrix", MARKOV]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["closure", "-r", "2", "-w", "1", "--class", "9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn property_verbs() {
    let dir = tempfile::tempdir().unwrap();
    let a3 = write(dir.path(), "a3.json", A3);
    let cases: [(&[&str], &str, i32); 7] = [
        (&["universal", "-k", "2", &a3], "YES", 0),
        (&["acyclic", &a3], "YES", 0),
        (&["acyclic", "--matrix", MARKOV], "NO", 0),
        (&["abundant", "--matrix", MARKOV], "YES", 0),
        (&["avoid", &a3, "--matrix", "0 2;-2 0"], "YES", 0),
        (&["avoid", &a3, "--matrix", "0 0;0 0"], "NO", 0),
        (&["universal", "-k", "2", "--test-weight", "2", &a3], "NO", 0),
    ];
    for (args, verdict, code) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        assert!(stdout(&out).starts_with(verdict), "{args:?}: {}", stdout(&out));
        let out = run(&[args, &["--json"]].concat());
        assert_eq!(json(&out)["verdict"], verdict);
    }
}

#[test]
fn density_witness_blocks() {
    let out = run(&["density-witness", "--matrix", "0 1;-1 0", "--matrix", "0", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["p"]["subset"], serde_json::json!([1, 2]));
    assert_eq!(v["q"]["subset"], serde_json::json!([3]));
    assert_eq!(v["matrix"]["mutable"], 3);
}

#[test]
fn warm_cache_matches_cold_and_no_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let args = ["universe", "-r", "3", "-w", "2", "--json"];
    let plain = stdout(&run(&args));
    let cold = stdout(&run(&[&args[..], &["--cache-dir", cache]].concat()));
    let warm = bin().args(args).env("MUTCLASS_CACHE_DIR", cache).output().unwrap();
    assert_eq!(cold, plain);
    assert_eq!(stdout(&warm), plain);
    let stats = json(&run(&["cache", "stats", "--cache-dir", cache, "--json"]));
    assert!(stats["classes"].as_u64().unwrap() > 0);
    let bypass = bin().args(["cache", "stats", "--no-cache"]).env("MUTCLASS_CACHE_DIR", cache).output().unwrap();
    assert_eq!(bypass.status.code(), Some(1));
    let compacted = run(&["cache", "compact", "--cache-dir", cache]);
    assert_eq!(compacted.status.code(), Some(0));
    assert!(stdout(&compacted).starts_with("kept="));
}
