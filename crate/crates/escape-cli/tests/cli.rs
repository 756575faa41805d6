//! End-to-end runs of the binary: the reduce/search/assemble/verify chain,
//! play exit codes, and transcript replay round trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_escape")
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(bin()).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

struct Workdir(PathBuf);

impl Workdir {
    fn new(tag: &str) -> Workdir {
        let dir = std::env::temp_dir().join(format!("escape-cli-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(
            dir.join("inst.json"),
            r#"{"shades": ["gray", "black"], "forbidden": []}"#,
        )
        .unwrap();
        Workdir(dir)
    }

    fn path(&self) -> &Path {
        &self.0
    }
}

impl Drop for Workdir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

#[test]
fn reduce_reports_the_language_counts() {
    let w = Workdir::new("reduce");
    let out = run(&["reduce", "--instance", "inst.json"], w.path());
    assert_eq!(code(&out), 0, "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("alphabet size 25"), "{text}");
    assert!(text.contains("15 good + 1 bad + 3 ugly"), "{text}");
}

#[test]
fn reduce_rejects_a_shadeless_instance() {
    let w = Workdir::new("badinst");
    std::fs::write(w.path().join("bad.json"), r#"{"shades": ["gray"], "forbidden": []}"#).unwrap();
    let out = run(&["reduce", "--instance", "bad.json"], w.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn search_assemble_verify_chain() {
    let w = Workdir::new("chain");
    let out = run(&["search", "--instance", "inst.json", "--k", "1", "--out", "s"], w.path());
    assert_eq!(code(&out), 0, "{out:?}");
    let out = run(
        &["assemble", "--instance", "inst.json", "--shading", "s/shading.json", "--out", "a"],
        w.path(),
    );
    assert_eq!(code(&out), 0, "{out:?}");
    let out = run(
        &["verify", "--structure", "a/counterexample.json", "--instance", "inst.json"],
        w.path(),
    );
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).contains("valid"));
}

#[test]
fn search_reports_exhaustion_for_a_blocked_instance() {
    let w = Workdir::new("exhaust");
    let tags: Vec<String> = ["H", "V"]
        .iter()
        .flat_map(|o| ["gray", "black"].iter().map(move |s| format!(r#"["{o}", "{s}"]"#)))
        .collect();
    let pairs: Vec<String> = tags
        .iter()
        .flat_map(|c| tags.iter().map(move |d| format!("[{c}, {d}]")))
        .collect();
    std::fs::write(
        w.path().join("blocked.json"),
        format!(r#"{{"shades": ["gray", "black"], "forbidden": [{}]}}"#, pairs.join(", ")),
    )
    .unwrap();
    let out = run(&["search", "--instance", "blocked.json", "--k", "2"], w.path());
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("no shading of size 2"));
}

#[test]
fn play_exit_codes_distinguish_outcomes() {
    let w = Workdir::new("play");
    // canonical play runs to quiescence
    let out = run(
        &["play", "--instance", "inst.json", "--strategy", "S_start", "--fugitive", "canonical"],
        w.path(),
    );
    assert_eq!(code(&out), 0, "{out:?}");
    // a forbidden-pattern opening loses immediately
    let out = run(
        &["play", "--instance", "inst.json", "--strategy", "S_start", "--fugitive", "scripted:start=bad1"],
        w.path(),
    );
    assert_eq!(code(&out), 2, "{out:?}");
    assert!(stdout(&out).contains("lost at step 1"));
}

#[test]
fn pipeline_asserts_shapes_and_exits_zero() {
    let w = Workdir::new("pipeline");
    let out = run(
        &[
            "play", "--instance", "inst.json", "--pipeline-m", "1", "--depth", "grid",
            "--exit-script", "1",
        ],
        w.path(),
    );
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).contains("equals G_1$"), "{}", stdout(&out));
}

#[test]
fn lifting_play_from_assembled_target_survives_and_replays() {
    let w = Workdir::new("lift");
    run(&["search", "--instance", "inst.json", "--k", "1", "--out", "s"], w.path());
    run(
        &["assemble", "--instance", "inst.json", "--shading", "s/shading.json", "--out", "a"],
        w.path(),
    );
    let out = run(
        &[
            "play", "--instance", "inst.json", "--fugitive",
            "lifting:target=a/counterexample.json", "--schedule", "random:seed=7", "--out", "p",
        ],
        w.path(),
    );
    assert_eq!(code(&out), 0, "{out:?}");
    let run_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(w.path().join("p/run.json")).unwrap())
            .unwrap();
    let hash = run_json["final_hash"].as_str().unwrap();
    assert_eq!(run_json["certificate_ok"], serde_json::json!(true));
    let out = run(
        &[
            "replay", "--transcript", "p/transcript.tsv", "--instance", "inst.json",
            "--expect-hash", hash,
        ],
        w.path(),
    );
    assert_eq!(code(&out), 0, "{out:?}");
    // a wrong hash is flagged
    let out = run(
        &[
            "replay", "--transcript", "p/transcript.tsv", "--instance", "inst.json",
            "--expect-hash", "0000",
        ],
        w.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn export_round_trips_and_renders_both_views() {
    let w = Workdir::new("export");
    run(&["search", "--instance", "inst.json", "--k", "1", "--out", "s"], w.path());
    run(
        &["assemble", "--instance", "inst.json", "--shading", "s/shading.json", "--out", "a"],
        w.path(),
    );
    let out = run(
        &["export", "--structure", "a/counterexample.json", "--format", "json"],
        w.path(),
    );
    assert_eq!(code(&out), 0);
    let reparsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let original: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(w.path().join("a/counterexample.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(reparsed, original, "export/import is the identity");
    let dot = stdout(&run(
        &["export", "--structure", "a/counterexample.json", "--format", "dot"],
        w.path(),
    ));
    assert!(dot.contains("color=green") && dot.contains("color=red"));
    assert!(dot.contains("[gray]"));
    let erased = stdout(&run(
        &["export", "--structure", "a/counterexample.json", "--format", "dot", "--erase-shades"],
        w.path(),
    ));
    assert!(!erased.contains("[gray]"));
}
