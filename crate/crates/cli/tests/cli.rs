use std::process::{Command, Output};

use serde_json::Value;

fn fgcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fgcheck"))
        .args(args)
        .env_remove("FG_CACHE_DIR")
        .output()
        .expect("spawn fgcheck")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn growth_radius_zero_is_one_row() {
    let o = fgcheck(&["growth", "--max-len", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "n,gamma,beta,delta,lower_bound\n0,3,1,3,\n");
}

#[test]
fn growth_radius_two() {
    let o = fgcheck(&["growth", "--max-len", "2"]);
    assert!(o.status.success());
    let rows: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(rows.len(), 4);
    // thirteen commutator elements of length ≤ 2, the identity among them
    assert_eq!(rows[3], "2,93,13,72,12");
}

#[test]
fn growth_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = fgcheck(&[
            "growth",
            "--max-len",
            "4",
            "--overlay",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    let first = std::fs::read(&a).unwrap();
    assert!(!first.is_empty());
    assert_eq!(first, std::fs::read(&b).unwrap());
}

#[test]
fn growth_budget_exceeded_keeps_finished_rows() {
    let o = fgcheck(&["growth", "--max-len", "4", "--max-candidates", "500"]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.starts_with("n,gamma"));
    assert!(out.lines().count() >= 2, "{out}");
    assert!(!out.contains("\n4,"));
}

#[test]
fn order_of_at_is_certified_infinite() {
    let o = fgcheck(&["order", "--word", "at"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["word"], "at");
    assert_eq!(v["result"]["kind"], "infinite");
    assert_eq!(v["result"]["certificate"]["k"], 3);
    assert_eq!(v["result"]["certificate"]["j"], 1);
    assert_eq!(v["certificate_facts"].as_array().unwrap().len(), 3);
}

#[test]
fn order_of_generator_is_finite() {
    let v = json(&fgcheck(&["order", "--word", "T"]));
    assert_eq!(v["result"]["kind"], "finite");
    assert_eq!(v["result"]["order"], 3);
}

#[test]
fn portrait_of_t_depth_one() {
    let o = fgcheck(&["portrait", "--word", "t", "--depth", "1"]);
    assert!(o.status.success());
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph"));
    for (v, label) in [("", 0), ("0", 1), ("1", 0), ("2", 0)] {
        assert!(
            dot.contains(&format!("\"{v}\" [label=\"{label}\"]")),
            "{dot}"
        );
    }
    let v = json(&fgcheck(&[
        "portrait", "--word", "t", "--depth", "1", "--format", "json",
    ]));
    assert_eq!(v["levels"][1], serde_json::json!([1, 0, 0]));
}

#[test]
fn malformed_word_reports_position() {
    let o = fgcheck(&["order", "--word", "atxA"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("position 2"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(fgcheck(&["lemma", "no-such-lemma"]).status.code(), Some(2));
    assert_eq!(fgcheck(&["growth"]).status.code(), Some(2));
    assert_eq!(
        fgcheck(&["growth", "--max-len", "1", "--format", "dot"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(fgcheck(&["cache", "info"]).status.code(), Some(2));
    assert_eq!(
        fgcheck(&["growth", "--max-len", "1", "--workers", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn clean_lemma_suites_exit_zero() {
    for args in [
        &["lemma", "mot-sans-red", "--max-len", "5"][..],
        &["lemma", "structure-I", "--max-len", "4"],
        &["lemma", "permut", "--max-len", "3"],
        &["lemma", "rel-123", "--max-len", "8", "--samples", "50"],
        &["lemma", "words-not-in-I", "--samples", "5"],
    ] {
        let o = fgcheck(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let v = json(&o);
        assert_eq!(v["violations"], serde_json::json!([]));
        assert!(v["tested"].as_u64().unwrap() > 0);
        assert_eq!(v["config"]["seed"], 0);
    }
}

#[test]
fn literal_characterization_reports_violations() {
    let o = fgcheck(&["lemma", "cara-I", "--max-len", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!json(&o)["violations"].as_array().unwrap().is_empty());
}

#[test]
fn seeded_suites_depend_only_on_seed() {
    let run = |seed: &str| {
        stdout(&fgcheck(&[
            "lemma",
            "rel-123",
            "--max-len",
            "6",
            "--samples",
            "30",
            "--seed",
            seed,
        ]))
    };
    assert_eq!(run("7"), run("7"));
}

#[test]
fn bounds_threshold() {
    let o = fgcheck(&["bounds", "--d", "3", "--m", "3", "--limit", "1e12"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["N"], 674);
    assert!(!v["samples"].as_array().unwrap().is_empty());
    assert_eq!(fgcheck(&["bounds", "--limit", "10"]).status.code(), Some(2));
}

#[test]
fn inject_at_radius_one() {
    let o = fgcheck(&["inject", "--n", "1"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["triples"], 1);
    assert_eq!(v["distinct_images"], 1);
    assert_eq!(v["length_bound"], 6);
}

#[test]
fn cache_build_then_reuse() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("nested").join("ball.fgball");
    let c = cache.to_str().unwrap();
    let built = json(&fgcheck(&[
        "cache",
        "build",
        "--max-len",
        "3",
        "--cache",
        c,
    ]));
    assert_eq!(built["radius"], 3);
    assert_eq!(built["elements"], 381);
    let info = json(&fgcheck(&["cache", "info", "--cache", c]));
    assert_eq!(info, built);

    let fresh = stdout(&fgcheck(&["growth", "--max-len", "2"]));
    // radius 2 fits in the cache, so no enumeration budget is needed
    let cached = fgcheck(&[
        "growth",
        "--max-len",
        "2",
        "--cache",
        c,
        "--max-candidates",
        "1",
    ]);
    assert!(cached.status.success());
    assert_eq!(stdout(&cached), fresh);

    let via_env = Command::new(env!("CARGO_BIN_EXE_fgcheck"))
        .args(["cache", "info"])
        .env("FG_CACHE_DIR", dir.path().join("nested"))
        .output()
        .unwrap();
    assert!(via_env.status.success());
    assert_eq!(
        serde_json::from_slice::<Value>(&via_env.stdout).unwrap()["elements"],
        381
    );
}
