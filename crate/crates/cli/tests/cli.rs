use std::path::{Path, PathBuf};
use std::process::Command;

use arena_cli::format::{Game, GameFile};
use arena_core::gadgets::{build_poa_unbounded, build_pos_linear, build_pos_nharmonic, default_q_probe_max};
use arena_core::rational::rat;
use arena_core::{Protocol, WeightSystem};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    json: Value,
    stdout: String,
    stderr: String,
}

fn arena(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_arena"));
    cmd.args(args).env_remove("ARENA_MAX_PROFILES");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("run arena");
    let stdout = String::from_utf8(out.stdout).unwrap();
    Run {
        code: out.status.code().unwrap(),
        json: serde_json::from_str(&stdout).unwrap_or(Value::Null),
        stdout,
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

const TWO_PLAYER_TABLE: &str = r#"{
  "players": 2,
  "resources": [{"id": "r", "cost": {"table": [
    {"set": [0], "cost": "1"}, {"set": [1], "cost": "3"}, {"set": [0, 1], "cost": "4"}]}}],
  "strategies": [[["r"]], [["r"]]]
}"#;

// Both resources cost 1 alone and 2 together; the table lets player 0 ride
// free when the two meet, so player 0 chases player 1 forever.
const CHASE_GAME: &str = r#"{
  "players": 2,
  "resources": [
    {"id": "a", "cost": {"anonymous": ["0", "1", "2"]}},
    {"id": "b", "cost": {"anonymous": ["0", "1", "2"]}}
  ],
  "strategies": [[["a"], ["b"]], [["a"], ["b"]]]
}"#;

const CHASE_TABLE: &str = r#"{
  "players": 2,
  "entries": [{"cost": {"anonymous": ["0", "1", "2"]}, "shares": [
    {"set": [], "shares": ["0", "0"]},
    {"set": [0], "shares": ["1", "0"]},
    {"set": [1], "shares": ["0", "1"]},
    {"set": [0, 1], "shares": ["0", "2"]}]}]
}"#;

#[test]
fn analyze_pos_linear_file() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("linear.json");
    let gen = arena(
        &["gadget", "pos_linear", "--n", "2", "--eps", "1/2", "--out", s(&file)],
        &[],
    );
    assert_eq!(gen.code, 0, "{}", gen.stderr);
    assert_eq!(gen.json["measured"], "3/2");
    let run = arena(&["analyze", s(&file)], &[]);
    assert_eq!(run.code, 0);
    for key in ["pne", "optimum", "poa", "pos", "protocol", "potential"] {
        assert!(run.json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(run.json["pos"], "3/2");
    assert_eq!(run.json["optimum"]["cost"], "1/1");
    assert_eq!(run.json["potential"][0], "3/4");
    assert!(run.stderr.contains("PoS 3/2"));
}

#[test]
fn single_strategy_model_has_unit_ratios() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "g.json", TWO_PLAYER_TABLE);
    let run = arena(&["analyze", s(&file)], &[]);
    assert_eq!(run.code, 0);
    assert_eq!(run.json["poa"], "1/1");
    assert_eq!(run.json["pos"], "1/1");
    assert_eq!(run.json["pne"].as_array().unwrap().len(), 1);
}

#[test]
fn unstable_table_has_undefined_ratios() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "g.json", CHASE_GAME);
    write(&dir, "t.json", CHASE_TABLE);
    let protocol = format!("table:{}", s(&dir.path().join("t.json")));
    let run = arena(&["analyze", s(&game), "--protocol", &protocol], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.json["pne"], serde_json::json!([]));
    assert_eq!(run.json["poa"], "undefined");
    assert_eq!(run.json["pos"], "undefined");
    assert_eq!(run.json["potential"], Value::Null);
    assert_eq!(run.json["protocol"], "table");

    let dyn_run = arena(
        &[
            "dynamics",
            s(&game),
            "--protocol",
            &protocol,
            "--start",
            "0,0",
            "--max-steps",
            "6",
            "--strict",
        ],
        &[],
    );
    assert_eq!(dyn_run.code, 3);
    assert_eq!(dyn_run.json["converged"], false);
    assert_eq!(dyn_run.json["steps"].as_array().unwrap().len(), 6);
}

#[test]
fn shares_of_non_anonymous_pair() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "g.json", TWO_PLAYER_TABLE);
    let run = arena(&["shares", s(&file), "--profile", "0,0"], &[]);
    assert_eq!(run.code, 0);
    assert_eq!(run.json["resources"][0]["shares"], serde_json::json!(["1/1", "3/1"]));
    assert_eq!(run.json["private_costs"], serde_json::json!(["1/1", "3/1"]));
}

#[test]
fn shares_on_shortcut_sum_to_its_cost() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("harmonic.json");
    let gen = arena(
        &["gadget", "pos_nharmonic", "--n", "4", "--eps", "1/4", "--out", s(&file)],
        &[],
    );
    assert_eq!(gen.code, 0, "{}", gen.stderr);
    assert_eq!(gen.json["expected"]["value"], "18/5");
    // players 2 and 3 form B; their second path runs over the shortcut
    let run = arena(&["shares", s(&file), "--profile", "0,0,1,1"], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let shortcut = run.json["resources"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["id"] == "e3")
        .unwrap();
    assert_eq!(shortcut["users"], serde_json::json!([2, 3]));
    assert_eq!(shortcut["cost"], "5/4");
    let total = shortcut["shares"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| arena_core::rational::parse_rational(v.as_str().unwrap()).unwrap())
        .fold(rat(0, 1), |a, b| a + b);
    assert_eq!(total, rat(5, 4));
}

#[test]
fn unused_resources_have_empty_rows() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "g.json", CHASE_GAME);
    let run = arena(&["shares", s(&file), "--profile", "0,0"], &[]);
    assert_eq!(run.json["resources"][1]["shares"], serde_json::json!([]));
    assert_eq!(run.json["resources"][1]["users"], serde_json::json!([]));
}

#[test]
fn gadget_reports() {
    let lin = arena(&["gadget", "pos_linear", "--n", "3", "--eps", "1/2"], &[]);
    assert_eq!(lin.code, 0);
    assert_eq!(lin.json["expected"]["value"], "5/2");
    assert_eq!(lin.json["measured"], "5/2");
    assert_eq!(lin.json["verified"], true);
    assert!(lin.json["game"]["network"].is_object());

    let poa = arena(&["gadget", "poa_unbounded", "--a", "2", "--protocol", "shapley"], &[]);
    assert_eq!(poa.code, 0);
    assert_eq!(poa.json["case"], 1);
    assert_eq!(poa.json["q"], "16/1");
    let measured = arena_core::rational::parse_rational(poa.json["measured"].as_str().unwrap()).unwrap();
    assert!(measured >= rat(5, 2));
}

#[test]
fn dynamics_trace() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("linear.json");
    arena(
        &["gadget", "pos_linear", "--n", "3", "--eps", "1/4", "--out", s(&file)],
        &[],
    );

    let at_pne = arena(&["dynamics", s(&file), "--start", "1,0,0"], &[]);
    assert_eq!(at_pne.code, 0);
    assert_eq!(at_pne.json["steps"], serde_json::json!([]));
    assert_eq!(at_pne.json["converged"], true);

    let off = arena(&["dynamics", s(&file), "--start", "0,0,0"], &[]);
    assert_eq!(off.json["converged"], true);
    assert_eq!(off.json["final"], serde_json::json!([1, 0, 0]));
    let mut last = arena_core::rational::parse_rational(off.json["initial_potential"].as_str().unwrap()).unwrap();
    for step in off.json["steps"].as_array().unwrap() {
        let phi = arena_core::rational::parse_rational(step["potential"].as_str().unwrap()).unwrap();
        assert!(phi < last);
        last = phi;
    }

    let a = arena(
        &["dynamics", s(&file), "--start", "random:7", "--schedule", "shuffled:3"],
        &[],
    );
    let b = arena(
        &["dynamics", s(&file), "--start", "random:7", "--schedule", "shuffled:3"],
        &[],
    );
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_bounds_runs() {
    let run = arena(
        &[
            "verify-bounds",
            "--seed",
            "3",
            "--count",
            "45",
            "--class",
            "supermodular",
        ],
        &[],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.json["passed"], true);
    assert_eq!(run.json["suites"][0]["suite"], "pos_supermodular");
    assert_eq!(run.json["suites"][0]["checked"], 45);
    let all = arena(&["verify-bounds", "--seed", "3", "--count", "30"], &[]);
    assert_eq!(all.json["suites"].as_array().unwrap().len(), 4);
    let seq = arena(&["--sequential", "verify-bounds", "--seed", "3", "--count", "30"], &[]);
    assert_eq!(all.stdout, seq.stdout);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "g.json", CHASE_GAME);
    let bad = write(
        &dir,
        "bad.json",
        r#"{"players": 2, "resources": [{"id": "a", "cost": {"anonymous": ["0", "2", "1"]}}], "strategies": [[["a"]], [["a"]]]}"#,
    );
    let garbage = write(&dir, "garbage.json", "not json");

    assert_eq!(arena(&["analyze", s(&bad)], &[]).code, 2);
    assert_eq!(arena(&["analyze", s(&garbage)], &[]).code, 2);
    assert_eq!(arena(&["analyze", s(&dir.path().join("missing.json"))], &[]).code, 2);
    assert_eq!(arena(&["shares", s(&good), "--profile", "0,5"], &[]).code, 2);
    assert_eq!(arena(&["shares", s(&good), "--profile", "0"], &[]).code, 2);
    assert_eq!(arena(&["analyze", s(&good), "--protocol", "nash"], &[]).code, 2);
    assert_eq!(arena(&["gadget", "pos_nharmonic", "--n", "3"], &[]).code, 2);

    let capped = arena(&["analyze", s(&good)], &[("ARENA_MAX_PROFILES", "3")]);
    assert_eq!(capped.code, 3);
    assert!(capped.stderr.contains("cap"));
    assert_eq!(arena(&["analyze", s(&good)], &[("ARENA_MAX_PROFILES", "4")]).code, 0);
    assert_eq!(arena(&["analyze", s(&good)], &[("ARENA_MAX_PROFILES", "lots")]).code, 2);
}

fn assert_round_trip(game: Game) {
    let text = GameFile::from_game(&game).to_json();
    assert_eq!(GameFile::parse(&text).unwrap(), game);
}

#[test]
fn gadgets_round_trip() {
    for n in 2..=6 {
        for eps in [rat(1, 4), rat(1, 2), rat(3, 4)] {
            assert_round_trip(Game::Network(build_pos_linear(n, &eps).unwrap().network));
        }
    }
    for n in [2, 4, 6, 8] {
        let g = build_pos_nharmonic(n, &rat(1, 4), &WeightSystem::unit(n)).unwrap();
        assert_round_trip(Game::Network(g.network));
    }
    for a in [1, 2, 5, 10] {
        let a = rat(a, 1);
        let g = build_poa_unbounded(&a, &Protocol::Shapley, &default_q_probe_max(&a)).unwrap();
        assert_round_trip(Game::Network(g.gadget.network));
    }

    let dir = TempDir::new().unwrap();
    let file = dir.path().join("poa.json");
    arena(&["gadget", "poa_unbounded", "--a", "5", "--out", s(&file)], &[]);
    let built = build_poa_unbounded(&rat(5, 1), &Protocol::Shapley, &default_q_probe_max(&rat(5, 1))).unwrap();
    assert_eq!(GameFile::load(&file).unwrap(), Game::Network(built.gadget.network));
}
