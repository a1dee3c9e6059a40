use mbp::cli::{run_with, CommandResult};
use mbp::json::{problem_from_json, problem_to_json, rep_to_json};
use mbp_core::algebra::{build_based_algebra, build_bipartite_problem, parse_presentation};
use mbp_core::exact::Q;
use mbp_core::problem::{Problem, Representation};
use mbp_core::reduce::{self, EdgeCase};
use mbp_core::weyr::JordanData;
use proptest::prelude::*;
use serde_json::Value;
use std::path::PathBuf;

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn mbp(args: &[&str]) -> CommandResult {
    run_with(std::iter::once("mbp").chain(args.iter().copied()), false)
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mbp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn twoloop() -> Problem {
    let text = std::fs::read_to_string(fixture("twoloop.quiver")).unwrap();
    build_bipartite_problem(&build_based_algebra(&parse_presentation(&text).unwrap()).unwrap())
}

#[test]
fn diffs_match_golden_file() {
    let want = std::fs::read_to_string(fixture("twoloop.diffs.txt")).unwrap();
    for input in ["twoloop.quiver", "twoloop.problem.json"] {
        let out = mbp(&["diffs", &fixture(input)]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert_eq!(out.stdout, want, "{input}");
    }
}

#[test]
fn build_then_validate_round_trips() {
    for stem in ["twoloop", "kA2", "kA3", "loop"] {
        let quiver = fixture(&format!("{stem}.quiver"));
        // the loop has no relations, so only its representation problem is finite
        let built = if stem == "loop" { mbp(&["build", "--reps", &quiver]) } else { mbp(&["build", &quiver]) };
        assert_eq!(built.code, 0, "{stem}: {}", built.stderr);
        let path = scratch(&format!("{stem}.json"), &built.stdout);
        let ok = mbp(&["validate", path.to_str().unwrap()]);
        assert_eq!(ok.code, 0, "{stem}: {}{}", ok.stdout, ok.stderr);
        let v: Value = serde_json::from_str(&built.stdout).unwrap();
        let p = problem_from_json(&v).unwrap();
        assert_eq!(problem_to_json(&p), v, "{stem} re-read");
        assert_eq!(serde_json::to_string_pretty(&problem_to_json(&p)).unwrap() + "\n", built.stdout);
    }
}

#[test]
fn checked_in_problems_match_build() {
    for stem in ["kA2", "kA3", "loop"] {
        let built = mbp(&["build", "--reps", &fixture(&format!("{stem}.quiver"))]);
        let want = std::fs::read_to_string(fixture(&format!("{stem}.problem.json"))).unwrap();
        let a: Value = serde_json::from_str(&built.stdout).unwrap();
        let b: Value = serde_json::from_str(&want).unwrap();
        assert_eq!(a, b, "{stem}");
    }
}

#[test]
fn iso_is_reflexive() {
    let p = fixture("kA2.problem.json");
    let r = fixture("kA2_rank1.rep.json");
    let out = mbp(&["iso", "--problem", &p, &r, &r]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("true"));
    let out = mbp(&["iso", &p, &r, &r]);
    assert_eq!(out.code, 0, "{}", out.stderr);
}

#[test]
fn canon_of_rank_one_rep_has_one_link() {
    let p = fixture("kA2.problem.json");
    let r = fixture("kA2_rank1.rep.json");
    let out = mbp(&["--format", "json", "canon", &p, &r]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["links"], 1);
    assert_eq!(v["version"], "mbp-1");
    let trace = scratch("trace.json", "");
    let out = mbp(&["canon", "--problem", &p, "--rep", &r, "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    let t: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t["version"], "mbp-1");
    assert!(t["steps"].as_array().is_some_and(|s| !s.is_empty()), "{t}");
}

#[test]
fn indec_verdicts() {
    let p = fixture("kA2.problem.json");
    let out = mbp(&["indec", "--problem", &p, "--rep", &fixture("kA2_rank1.rep.json")]);
    assert_eq!(out.code, 1);
    let prob = problem_from_json(&serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap()).unwrap();
    let mut rep = Representation::zero(&prob, &[1, 1]);
    rep.blocks[0].set(0, 0, Q::from_integer(1.into()));
    let r = scratch("simple.rep.json", &rep_to_json(&prob, &rep).to_string());
    let out = mbp(&["indec", "--problem", &p, "--rep", r.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
}

#[test]
fn exit_codes() {
    assert_eq!(mbp(&["bogus"]).code, 64);
    assert_eq!(mbp(&["canon", "--problem"]).code, 64);
    assert_eq!(mbp(&["--format", "dot", "weyr", &fixture("nilpotent.matrix.json")]).code, 64);
    let out = mbp(&["validate", "/nonexistent/problem.json"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.starts_with("error: "));
    let out = mbp(&["--format", "json", "validate", "/nonexistent/problem.json"]);
    assert_eq!(out.code, 2);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert!(v["error"]["kind"].is_string());
    assert_eq!(v["version"], "mbp-1");
    let bad = scratch("bad.json", "{\"version\": \"mbp-1\"");
    assert_eq!(mbp(&["validate", bad.to_str().unwrap()]).code, 2);
}

#[test]
fn weyr_of_fixture() {
    let out = mbp(&["--format", "json", "weyr", &fixture("nilpotent.matrix.json")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let again = mbp(&["--format", "json", "weyr", &fixture("nilpotent.matrix.json")]);
    assert_eq!(out.stdout, again.stdout);
    assert!(mbp(&["weyr", &fixture("nilpotent.matrix.json")]).stdout.contains("m = (2, 1)"));
}

#[test]
fn detect_wild_on_worked_state() {
    let p0 = twoloop();
    let (_, p1) = reduce::edge_reduction(&p0, EdgeCase::Full).unwrap();
    let (_, p2) = reduce::loop_reduction(&p1, &JordanData::from_blocks(Q::from_integer(0.into()), &[2])).unwrap();
    let (_, mut cur) = reduce::loop_mutation(&p2).unwrap();
    for _ in 0..3 {
        cur = reduce::regularize(&cur).unwrap().problem;
    }
    let path = scratch("worked.json", &problem_to_json(&cur).to_string());
    let out = mbp(&["--format", "json", "detect-wild", path.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["wild"]["case"], "Case2", "{v}");
    assert_eq!(v["wild"]["f"], "x−x̄");
    assert_eq!(v["wild"]["tag"], "local-case-2-unresolved");
    let none = mbp(&["detect-wild", &fixture("kA2.problem.json")]);
    assert_eq!(none.code, 1, "{}", none.stdout);
}

#[test]
fn replay_finds_edge_step() {
    let src = fixture("kA2.problem.json");
    let p = problem_from_json(&serde_json::from_str(&std::fs::read_to_string(&src).unwrap()).unwrap()).unwrap();
    let (_, target) = reduce::edge_reduction(&p, EdgeCase::General).unwrap();
    let t = scratch("target.json", &problem_to_json(&target).to_string());
    let out = mbp(&["--format", "json", "replay", "--problem", &src, "--target", t.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("\"edge\""), "{}", out.stdout);
}

#[test]
fn tree_formats() {
    let p = fixture("kA2.problem.json");
    for fmt in ["text", "json", "dot"] {
        let out = mbp(&["--format", fmt, "tree", "--problem", &p, "--sizes", "1,2"]);
        assert_eq!(out.code, 0, "{fmt}: {}", out.stderr);
    }
    let dot = mbp(&["--format", "dot", "tree", "--problem", &p, "--sizes", "1,1"]);
    assert!(dot.stdout.starts_with("digraph"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rep_json_round_trip(entries in proptest::collection::vec(-5i64..=5, 6), den in 1i64..4) {
        let text = std::fs::read_to_string(fixture("kA2.problem.json")).unwrap();
        let p = problem_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        let mut rep = Representation::zero(&p, &[2, 3]);
        for (k, x) in entries.iter().enumerate() {
            rep.blocks[0].set(k / 3, k % 3, Q::new((*x).into(), den.into()));
        }
        let v = rep_to_json(&p, &rep);
        let back = mbp::json::rep_from_json(&p, &v).unwrap();
        prop_assert_eq!(&back, &rep);
        prop_assert_eq!(rep_to_json(&p, &back), v);
    }

    #[test]
    fn canon_output_is_deterministic(entries in proptest::collection::vec(-2i64..=2, 6)) {
        let text = std::fs::read_to_string(fixture("kA2.problem.json")).unwrap();
        let p = problem_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        let mut rep = Representation::zero(&p, &[2, 3]);
        for (k, x) in entries.iter().enumerate() {
            rep.blocks[0].set(k / 3, k % 3, Q::from_integer((*x).into()));
        }
        let r = scratch("prop.rep.json", &rep_to_json(&p, &rep).to_string());
        let a = mbp(&["--format", "json", "canon", &fixture("kA2.problem.json"), r.to_str().unwrap()]);
        let b = mbp(&["--format", "json", "canon", &fixture("kA2.problem.json"), r.to_str().unwrap()]);
        prop_assert_eq!(a.code, 0);
        prop_assert_eq!(a.stdout, b.stdout);
    }
}
