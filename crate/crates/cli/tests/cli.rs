use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scenegen_core::fss;
use scenegen_core::logic::PartialModel;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn scenegen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scenegen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_exit_codes() {
    let full = fixture("full_scene.fss");
    assert_eq!(code(&scenegen(&["check", s(&full)])), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("far.fss");
    fs::write(&bad, fs::read_to_string(&full).unwrap() + "far(g, bl).\n").unwrap();
    let out = scenegen(&["check", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("V_dist"), "{}", stderr(&out));

    let malformed = dir.path().join("broken.fss");
    fs::write(&malformed, "a : Car.\nonRoad(a\n").unwrap();
    let out = scenegen(&["check", s(&malformed)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("3:1"), "{}", stderr(&out));

    assert_eq!(code(&scenegen(&["check", "/nonexistent/file.fss"])), 1);
}

#[test]
fn concretize_matches_golden_scene() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scene.json");
    let o = scenegen(&["concretize", s(&fixture("strip_pair.fss")), "--map", "strip", "--seed", "0", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        fs::read_to_string(fixture("strip_pair.seed0.scene.json")).unwrap()
    );
}

#[test]
fn concretize_refuses_inconsistent_input() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.fss");
    fs::write(&spec, "a : Car. b : Car. close(a, b). far(a, b).").unwrap();
    let report = dir.path().join("report.json");
    let scene = dir.path().join("scene.json");
    let o = scenegen(&["concretize", s(&spec), "--map", "strip", "--out", s(&scene), "--report", s(&report)]);
    assert_eq!(code(&o), 2);
    assert!(!scene.exists());
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["status"], "StaticError");
    assert_eq!(r["evaluations_used"], 0);
}

#[test]
fn zero_budget_is_best_effort() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scene.json");
    let o = scenegen(&[
        "concretize",
        s(&fixture("full_scene.fss")),
        "--map",
        "cross",
        "--max-evals",
        "0",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("BestEffort: 5 evaluations"));
    assert!(out.exists());
}

#[test]
fn abstraction_of_figure_scene_matches_fixture() {
    let o = scenegen(&["abstract", s(&fixture("levels_scene.json")), "--map", s(&fixture("avenue.json"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        fs::read_to_string(fixture("levels_scene.abstract.fss")).unwrap()
    );
}

#[test]
fn abstraction_of_empty_scene_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("empty.json");
    fs::write(&scene, r#"{"map": "strip", "actors": []}"#).unwrap();
    let o = scenegen(&["abstract", s(&scene)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn render_counts_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("one.json");
    fs::write(
        &scene,
        r#"{"map": "strip", "actors": [{"id": "a", "x": 50, "y": 17.5, "h": 0, "w": 2, "l": 4.5}]}"#,
    )
    .unwrap();
    let (a, b, c) = (dir.path().join("a.svg"), dir.path().join("b.svg"), dir.path().join("c.svg"));
    assert_eq!(code(&scenegen(&["render", s(&scene), "--out", s(&a)])), 0);
    assert_eq!(code(&scenegen(&["render", s(&scene), "--out", s(&b)])), 0);
    assert_eq!(code(&scenegen(&["render", s(&scene), "--out", s(&c), "--show-fov", "--show-ids"])), 0);
    let (a, b, c) = (
        fs::read_to_string(a).unwrap(),
        fs::read_to_string(b).unwrap(),
        fs::read_to_string(c).unwrap(),
    );
    assert_eq!(a, b);
    assert_eq!(a.matches("id=\"actor-").count(), 1);
    assert_eq!(a.matches("<path").count() + 1, c.matches("<path").count());
    assert_eq!(c.matches("id=\"fov-").count(), 1);
    assert!(c.contains(">a</text>"));
    assert_eq!(code(&scenegen(&["render", "/nonexistent.json", "--out", s(&dir.path().join("x.svg"))])), 1);
}

#[test]
fn generated_witness_abstracts_to_a_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("pair");
    let o = scenegen(&["gen", "--actors", "2", "--map", "cross", "--seed", "0", "--out", s(&prefix)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let spec = dir.path().join("pair.fss");
    let witness = dir.path().join("pair.scene.json");
    assert!(spec.exists() && witness.exists());
    let o = scenegen(&["abstract", s(&witness)]);
    assert_eq!(code(&o), 0);
    let closed = |text: &str| fss::build_model(&fss::parse(text).unwrap()).apply_validity_rules(&[]).0;
    let generated = closed(&fs::read_to_string(&spec).unwrap());
    let abstracted = closed(&String::from_utf8(o.stdout).unwrap());
    assert!(PartialModel::refines(&generated, &abstracted).unwrap());
}

#[test]
fn bench_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, r#"{"map": "strip", "configs": [], "seeds": [0]}"#).unwrap();
    let csv = dir.path().join("empty.csv");
    assert_eq!(code(&scenegen(&["bench", s(&empty), "--out", s(&csv)])), 0);
    assert_eq!(
        fs::read_to_string(&csv).unwrap(),
        "scene,algorithm,strategy,seed,stage,status,evaluations,wall_seconds,total_df,constraints\n"
    );

    fs::write(dir.path().join("bad.fss"), "a : Car. b : Car. leftOf(a, b). !leftOf(a, b).").unwrap();
    let one = dir.path().join("one.json");
    fs::write(
        &one,
        r#"{"map": "strip", "scenes": ["bad.fss"], "configs": [{"algo": "nsga2", "agg": "a"}], "seeds": [0]}"#,
    )
    .unwrap();
    let csv = dir.path().join("one.csv");
    assert_eq!(code(&scenegen(&["bench", s(&one), "--out", s(&csv)])), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("bad,nsga2,a,0,full,StaticError,0,"), "{}", lines[1]);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&scenegen(&["concretize"])), 1);
    assert_eq!(code(&scenegen(&["--help"])), 0);
    let o = scenegen(&["concretize", s(&fixture("strip_pair.fss")), "--map", "nowhere"]);
    assert_eq!(code(&o), 1);
    let o = scenegen(&["concretize", s(&fixture("strip_pair.fss")), "--map", "strip", "--algo", "ga", "--agg", "a"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("exactly one objective"), "{}", stderr(&o));
}
