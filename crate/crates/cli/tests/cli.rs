use std::process::{Command, Output};

use tropcount::counting::{CountResult, CountResultJson};
use tropcount::maps::MapJson;
use tropcount::moduli::{ComplexJson, ConeComplex};
use tropcount::polyhedral::{fan_projective_space, Fan, FanJson};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropcount")).args(args).env_remove("TROPCOUNT_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn oracle_prints_the_recursion() {
    let o = run(&["oracle", "kontsevich", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "620");
}

#[test]
fn usage_errors_exit_64() {
    for args in [&["bogus"][..], &["count", "--fan", "p2"], &["fan", "--fan", "p2", "--nope"], &[]] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(64), "{args:?}");
        assert!(stderr(&o).contains("Usage"));
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn fan_json_reparses() {
    let o = run(&["fan", "--fan", "p3"]);
    let j: FanJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j.schema.as_deref(), Some("tropcount/1"));
    assert_eq!(Fan::from_json(&j).unwrap().to_json(), fan_projective_space(3).unwrap().to_json());
}

#[test]
fn toy_complex_with_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("fan.svg");
    let o = run(&["complex", "--fan", "p2", "--contacts", "p2-degree:1-transverse", "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j: ComplexJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j.f_vector, vec![1, 6, 6]);
    let fan = std::sync::Arc::new(fan_projective_space(2).unwrap());
    let c = ConeComplex::from_json(fan, &j).unwrap();
    assert_eq!(c.f_vector(), vec![1, 6, 6]);
    let pic = std::fs::read_to_string(&svg).unwrap();
    assert!(pic.starts_with("<svg"));
    assert_eq!(pic.matches("<line").count(), 6);
}

#[test]
fn embedding_has_six_rays() {
    let o = run(&["embed", "--fan", "p2", "--contacts", "[[1,0],[0,1],[-1,-1]]"]);
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["ambient_rank"], 2);
    assert_eq!(j["rays"].as_array().unwrap().len(), 6);
}

#[test]
fn conic_count_is_deterministic_across_threads() {
    let base = ["count", "--fan", "p2", "--contacts", "p2-degree:2", "--points", "5", "--seed", "7"];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let many = run(&[&base[..], &["--threads", "4"]].concat());
    let env = Command::new(env!("CARGO_BIN_EXE_tropcount")).args(base).env("TROPCOUNT_THREADS", "3").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert!(stderr(&one).contains("degree = 1 (types: "));
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(one.stdout, env.stdout);
    let j: CountResultJson = serde_json::from_str(&stdout(&one)).unwrap();
    assert_eq!(j.total, 1);
    let r = CountResult::from_json(&fan_projective_space(2).unwrap(), &j).unwrap();
    assert_eq!(r.contributions.len(), j.contributions.len());
}

#[test]
fn cubic_count_matches_the_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("count.json");
    let o = run(&["count", "--fan", "p2", "--contacts", "p2-degree:3", "--points", "8", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("degree = 12 "));
}

#[test]
fn validate_reports_violations_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let count = run(&["count", "--fan", "p2", "--contacts", "p2-degree:1", "--points", "2", "--seed", "3"]);
    let j: CountResultJson = serde_json::from_str(&stdout(&count)).unwrap();
    let map = j.contributions[0].map.clone();
    let good = dir.path().join("good.json");
    std::fs::write(&good, serde_json::to_string(&map).unwrap()).unwrap();
    let o = run(&["validate", "--fan", "p2", "--map", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let mut bad: MapJson = map;
    bad.ty.legs[0].contact = bad.ty.legs[0].contact.iter().map(|x| 2 * x).collect();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, serde_json::to_string(&bad).unwrap()).unwrap();
    let o = run(&["validate", "--fan", "p2", "--map", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["valid"], false);
    assert!(stderr(&o).contains("balancing"));
}

#[test]
fn nongeneric_constraints_exhaust_retries_with_exit_3() {
    let o = run(&["count", "--fan", "p2", "--contacts", "p2-degree:1", "--points", "2", "--subspace", ";1,1", "--subspace", ";3,1", "--retries", "2"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("not generic"));
}

#[test]
fn subspace_flag_counts_intersections() {
    let o = run(&["count", "--fan", "p2", "--contacts", "p2-degree:1", "--points", "3", "--subspace", ";", "--subspace", ";", "--subspace", "1,2;"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("degree = 2 "));
}
