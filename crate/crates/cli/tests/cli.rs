use std::path::PathBuf;
use std::process::{Command, Output};

fn linegame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linegame")).args(args).output().expect("run linegame")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("linegame-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn simulate_to(path: &PathBuf) -> Output {
    linegame(&["simulate", "--n", "4", "--maker", "greedy", "--breaker", "idle", "--out", path.to_str().unwrap()])
}

#[test]
fn simulate_then_replay() {
    let path = scratch("ok.jsonl");
    let out = simulate_to(&path);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["tau"], 3);
    assert_eq!(summary["outcome"]["result"], "maker-win");

    let out = linegame(&["replay", "--transcript", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn configuration_errors_exit_with_one() {
    let out = linegame(&["simulate", "--n", "4", "--maker", "no-such-maker"]);
    assert_eq!(out.status.code(), Some(1));
    let out = linegame(&["simulate", "--n", "4", "--epsilon", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tampered_transcripts_exit_with_two_or_three() {
    let path = scratch("base.jsonl");
    assert_eq!(simulate_to(&path).status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();

    // Maker claims a point it already owns
    let dup = scratch("dup.jsonl");
    std::fs::write(&dup, text.replace("[[1,0],[2,0]]", "[[0,0],[2,0]]")).unwrap();
    let out = linegame(&["replay", "--transcript", dup.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    // the recorded winning time disagrees with the moves
    let late = scratch("late.jsonl");
    std::fs::write(&late, text.replace("\"tau\":3,\"m_tau\":3", "\"tau\":4,\"m_tau\":4")).unwrap();
    let out = linegame(&["replay", "--transcript", late.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn empty_sweep_writes_a_header() {
    let cfg = scratch("empty.toml");
    let csv = scratch("empty.csv");
    std::fs::write(&cfg, "n = []\nalpha = [1.0]\nb = [\"zero\"]\npairs = []\nseeds = [1]\n").unwrap();
    let out = linegame(&["sweep", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("kind,n,alpha,b,maker,breaker,seed"));
}

#[test]
fn bingame_equal_spread() {
    let out = linegame(&["bingame", "--T", "2", "--b", "1,1", "--dM", "2,3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["final_weight"], 2.0);
    assert_eq!(v["average_bound"], 2.0);
    assert_eq!(v["w"], serde_json::json!([3.0, 2.0]));
}
