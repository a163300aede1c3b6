use std::path::Path;
use std::process::{Command, Output};

use dial::config::Config;
use dial::instance::write_instance;
use dial::poses::write_poses;
use dial::tensor::ProbabilityTensor;
use dial::text::{parse_scores, write_points, write_scores};
use dial_core::scene::Pose;
use dial_core::selection::{IntersectionPolicy, SelectionProblem};
use dial_core::uncertainty::{mutual_information, PassStack};

fn dial(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dial")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn three_candidates(dir: &Path, policy: IntersectionPolicy) -> std::path::PathBuf {
    let p = SelectionProblem::new(
        vec![0.5, 0.25, 1.0, 0.125],
        vec![vec![0, 1], vec![1, 2, 3], vec![3]],
        1,
        vec![],
        policy,
    )
    .unwrap();
    let path = dir.join("problem.txt");
    std::fs::write(&path, write_instance(&p)).unwrap();
    path
}

#[test]
fn select_single_disc_is_argmax() {
    let dir = tempfile::tempdir().unwrap();
    let problem = three_candidates(dir.path(), IntersectionPolicy::Allow);
    for strategy in ["exact", "greedy", "bruteforce"] {
        let out = dial(&["select", "--problem", path_str(&problem), "--budget", "1", "--strategy", strategy]);
        assert!(out.status.success(), "{}", stderr(&out));
        let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(doc["format"], "dial-selection-result");
        assert_eq!(doc["chosen"], serde_json::json!([1]));
        assert_eq!(doc["objective"], 1.375);
    }
}

#[test]
fn select_respects_fixed_and_reports_new() {
    let dir = tempfile::tempdir().unwrap();
    let problem = three_candidates(dir.path(), IntersectionPolicy::Allow);
    let out = dial(&["select", "--problem", path_str(&problem), "--budget", "1", "--fixed", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["chosen"], serde_json::json!([0, 1]));
    assert_eq!(doc["new"], serde_json::json!([0]));
    assert_eq!(doc["certificate"], "exact");
}

#[test]
fn infeasible_prohibit_exits_six() {
    let dir = tempfile::tempdir().unwrap();
    let problem = three_candidates(dir.path(), IntersectionPolicy::Prohibit);
    // Candidate 1 overlaps both others.
    let out = dial(&["select", "--problem", path_str(&problem), "--budget", "3"]);
    assert_eq!(out.status.code(), Some(6));
    assert!(stderr(&out).starts_with("error[infeasible]: "), "{}", stderr(&out));
}

#[test]
fn error_categories_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.txt");
    let out = dial(&["select", "--problem", path_str(&missing)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error[io]: "));

    let garbage = dir.path().join("garbage.txt");
    std::fs::write(&garbage, "not an instance\n").unwrap();
    let out = dial(&["select", "--problem", path_str(&garbage)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("error[parse]: "));

    let problem = three_candidates(dir.path(), IntersectionPolicy::Allow);
    let out = dial(&["select", "--problem", path_str(&problem), "--budget", "9"]);
    assert_eq!(out.status.code(), Some(5), "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error[invalid]: "));

    assert_eq!(dial(&["select", "--strategy", "annealing"]).status.code(), Some(2));
    assert_eq!(dial(&[]).status.code(), Some(2));
}

#[test]
fn report_without_steps_fails() {
    let dir = tempfile::tempdir().unwrap();
    let full = dial(&["simulate", "--steps", "1"]);
    assert!(full.status.success(), "{}", stderr(&full));
    let text = stdout(&full);
    let header_only = dir.path().join("header.jsonl");
    std::fs::write(&header_only, format!("{}\n", text.lines().next().unwrap())).unwrap();
    let out = dial(&["report", path_str(&header_only)]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("no steps recorded"), "{}", stderr(&out));

    let manifest = dir.path().join("run.jsonl");
    std::fs::write(&manifest, &text).unwrap();
    let out = dial(&["report", path_str(&manifest)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("labeled discs   6"));

    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(dial(&["report", path_str(&empty)]).status.code(), Some(4));
}

#[test]
fn uncertainty_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let data = vec![0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
    let tensor = ProbabilityTensor { points: 2, passes: 2, classes: 3, data: data.iter().map(|&v| v as f32).collect() };
    let path = dir.path().join("probs.dpst");
    std::fs::write(&path, tensor.encode()).unwrap();
    let out = dial(&["uncertainty", "--tensor", path_str(&path)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let scores = parse_scores(&stdout(&out)).unwrap();
    let expected = mutual_information(&PassStack::new(2, 2, 3, data).unwrap()).scores;
    assert_eq!(scores, expected);
    assert_eq!(scores[1], 0.0);

    let out = dial(&["uncertainty", "--tensor", path_str(&path), "--metric", "conf"]);
    assert_eq!(parse_scores(&stdout(&out)).unwrap(), vec![0.625, 0.0]);
}

#[test]
fn aggregate_then_select() {
    let dir = tempfile::tempdir().unwrap();
    let points: Vec<[f64; 3]> = (0..40).map(|i| [i as f64, 0.0, 0.0]).collect();
    let scores: Vec<f64> = (0..40).map(|i| if i >= 30 { 1.0 } else { 0.1 }).collect();
    let poses: Vec<Pose> = (0..40).map(|i| Pose::from_yaw(0.0, [i as f64, 0.0, 0.0])).collect();
    let (pp, sp, tp) = (dir.path().join("p.txt"), dir.path().join("s.txt"), dir.path().join("t.txt"));
    std::fs::write(&pp, write_points(&points)).unwrap();
    std::fs::write(&sp, write_scores(&scores)).unwrap();
    std::fs::write(&tp, write_poses(&poses)).unwrap();
    let problem = dir.path().join("problem.txt");
    let grid = dir.path().join("grid.txt");
    let args = ["--points", path_str(&pp), "--scores", path_str(&sp), "--poses", path_str(&tp), "--stride", "10", "--radius", "5"];
    let mut agg = vec!["aggregate"];
    agg.extend(args);
    agg.extend(["--problem-out", path_str(&problem), "--grid-out", path_str(&grid), "--budget", "1"]);
    let out = dial(&agg);
    assert!(out.status.success(), "{}", stderr(&out));
    let alpha: Vec<(usize, f64)> = stdout(&out)
        .lines()
        .map(|l| {
            let (id, a) = l.split_once('\t').unwrap();
            (id.parse().unwrap(), a.parse().unwrap())
        })
        .collect();
    assert_eq!(alpha.iter().map(|a| a.0).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    assert_eq!(std::fs::read_to_string(&grid).unwrap().lines().count(), 40);

    let out = dial(&["select", "--problem", path_str(&problem)]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["chosen"], serde_json::json!([3]));

    let mut direct = vec!["select"];
    direct.extend(args);
    let out = dial(&direct);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc2: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc, doc2);
}

#[test]
fn default_config_round_trips() {
    let out = dial(&["config"]);
    assert!(out.status.success());
    assert_eq!(Config::from_toml(&stdout(&out)).unwrap(), Config::default());
}

#[test]
fn simulate_is_deterministic_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.jsonl");
    let a = dial(&["simulate", "--steps", "2", "--strategy", "hpcs", "--output", path_str(&path)]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert!(a.stdout.is_empty());
    let b = dial(&["simulate", "--steps", "2", "--strategy", "hpcs"]);
    assert_eq!(std::fs::read(&path).unwrap(), b.stdout);
    let c = dial(&["simulate", "--steps", "2", "--strategy", "hpcs", "--seed", "1"]);
    assert_ne!(b.stdout, c.stdout);
}
