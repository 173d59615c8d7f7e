//! End-to-end tests of the `mtf` binary: the documented examples, format
//! round-trips, determinism, and exit codes.

use std::process::{Command, Output};

fn mtf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = mtf(args);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn member_example() {
    let out = stdout(&["member", "--subgroup", "a2:aa", "--word", "aaaa"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["member"], true);
    let out = stdout(&["member", "--subgroup", "a2:aa", "--word", "a"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["member"], false);
}

#[test]
fn present_bs12() {
    let out = stdout(&["present", "--psi", "a->aa", "--gens", "a,t"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["kind"], "mapping_torus");
    assert_eq!(v["generators"], serde_json::json!(["a"]));
    assert_eq!(v["relations"][0]["rhs"], "aa");
    assert_eq!(v["chi"], 0);
}

#[test]
fn pirank_example() {
    let out = stdout(&["pirank", "abAB", "--rank", "2"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["pi"], 2);
    assert_eq!(v["verdict"], "not_lqc");
    let out = stdout(&["pirank", "ab", "--rank", "2"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["pi"], "inf");
    assert_eq!(v["verdict"], "lqc_hyperbolic");
}

#[test]
fn deterministic_output() {
    for args in [
        vec!["intersect", "--g1", "h:aa,b", "--g2", "k:aaa,b"],
        vec!["present", "--psi", "a->ab;b->a", "--gens", "a,t"],
        vec![
            "irr-scan",
            "--psi",
            "a->a;b->b",
            "--len-cap",
            "3",
            "--m-max",
            "2",
        ],
    ] {
        let first = stdout(&args);
        let second = stdout(&args);
        assert_eq!(first, second, "repeated runs must be byte-identical");
    }
}

#[test]
fn graph_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("mtf-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("graph.txt");
    // fold a wedge, write its text form, re-core it from the file
    let out = stdout(&["fold", "--subgroup", "h:abA,b", "--rank", "2", "--pretty"]);
    std::fs::write(&path, &out).unwrap();
    let again = stdout(&[
        "core",
        "--graph",
        path.to_str().unwrap(),
        "--pointed",
        "--pretty",
    ]);
    assert_eq!(out.trim(), again.trim(), "folded pointed core is stable");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn pair_tighten_with_trace() {
    let dir = std::env::temp_dir().join(format!("mtf-cli-trace-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let pair = dir.join("pair.txt");
    let trace = dir.join("trace.json");
    // X = a-loop (e0), Z = X with an a^2-cycle wedged on: folds to the loop
    std::fs::write(
        &pair,
        "vertices 2 basepoint 0 rank 1\n0 -a-> 0\n0 -a-> 1\n1 -a-> 0\nX: e0\n",
    )
    .unwrap();
    let out = stdout(&[
        "tighten",
        "--pair",
        pair.to_str().unwrap(),
        "--psi",
        "a->aa",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["relative_rank"], 0);
    let tr: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert!(!tr["steps"].as_array().unwrap().is_empty());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn dot_export() {
    let dir = std::env::temp_dir().join(format!("mtf-cli-dot-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dot = dir.join("g.dot");
    stdout(&[
        "fold",
        "--subgroup",
        "h:a",
        "--rank",
        "1",
        "--dot",
        dot.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("label=\"a\""));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_codes() {
    // 1: parse error
    let out = mtf(&["member", "--subgroup", "h:a9!", "--word", "a"]);
    assert_eq!(out.status.code(), Some(1));
    // 2: precondition violation (non-injective psi)
    let out = mtf(&["present", "--psi", "a->ab;b->ab", "--gens", "a,t"]);
    assert_eq!(out.status.code(), Some(2));
    // 3: cap exceeded (pirank budget)
    let out = mtf(&["pirank", "aabb", "--rank", "2", "--budget", "2"]);
    assert_eq!(out.status.code(), Some(3));
    // 3: hnn grade beyond m-cap
    let out = mtf(&[
        "hnn", "--a-rank", "1", "--c-rank", "1", "--images", "a1.c5_1", "--m-cap", "3",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn normalize_and_euler() {
    let out = stdout(&["normalize", "--psi", "a->aa", "--word", "Tat"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["canonical"], "aa");
    let out = stdout(&["euler", "--psi", "a->a;b->b", "--gens", "a,b,t"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["chi"], 0);
}

#[test]
fn hnn_and_peripherals() {
    let out = stdout(&[
        "hnn", "--a-rank", "1", "--c-rank", "1", "--images", "a1.c1_1",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["m"], 1);
    assert_eq!(v["l_basis"], serde_json::json!(["a1", "c0_1"]));

    let out = stdout(&["peripherals", "--psi", "a->b;b->a", "--factors", "a;b"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["orbits"][0]["h"], "tt");
    assert_eq!(v["orbits"][0]["certificate"]["k"], 2);
}

#[test]
fn conj_into_and_ffs() {
    let out = stdout(&["conj-into", "--h", "h:baB", "--k", "k:a"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["conjugator"], "b");
    let out = stdout(&["ffs", "--h", "h:aa,b", "--factors", "a"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["factors"][0]["basis"], serde_json::json!(["aa"]));
}
