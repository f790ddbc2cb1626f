use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kseries::estimator::DensityEstimate;
use tempfile::TempDir;

fn kseries(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kseries"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

const UNIFORM_03: &str = r#"{"family":"uniform","support":[0,3]}"#;

fn simulate_irwin_hall(dir: &Path) {
    ok(&kseries(
        dir,
        &["simulate", "irwin_hall", "-t", "3", "-r", "4000", "--seed", "11", "--out", "."],
    ));
}

#[test]
fn bad_syntax_exits_two_with_line() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.loop"), "x := 0\nwhile (True):\n  x := x +\nend\n").unwrap();
    let out = kseries(dir.path(), &["simulate", "bad.loop", "-t", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn usage_error_exits_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(kseries(dir.path(), &["fit"]).status.code(), Some(2));
    assert_eq!(kseries(dir.path(), &["nonsense"]).status.code(), Some(2));
}

#[test]
fn non_pd_moments_fit_with_warning() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("m.json"), r#"{"degrees":[2],"values":[1.0,0.0,-1.0]}"#).unwrap();
    let out = kseries(dir.path(), &["fit", "m.json", "--reference", UNIFORM_03]);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-positive variance"));
}

#[test]
fn bad_reference_exits_two() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("m.json"), r#"{"degrees":[2],"values":[1.0,0.0,1.0]}"#).unwrap();
    let normal = r#"{"family":"normal","params":{"mean":0,"variance":-1}}"#;
    let out = kseries(dir.path(), &["fit", "m.json", "--reference", normal]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn same_file_test_has_zero_statistic() {
    let dir = TempDir::new().unwrap();
    simulate_irwin_hall(dir.path());
    ok(&kseries(
        dir.path(),
        &["test", "ks", "observations.csv", "observations.csv", "-o", "r.json"],
    ));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["statistic"].as_f64(), Some(0.0));
    assert_eq!(r["decisions"][0]["rejected"].as_bool(), Some(false));
}

#[test]
fn fit_then_eval_is_bit_exact() {
    let dir = TempDir::new().unwrap();
    simulate_irwin_hall(dir.path());
    let printed = ok(&kseries(
        dir.path(),
        &["fit", "moments.json", "--reference", UNIFORM_03, "-o", "est.json"],
    ));
    assert!(printed.contains("max |residual|"));
    ok(&kseries(
        dir.path(),
        &["eval", "est.json", "--linspace", "-0.5,3.5,41", "-o", "grid.csv"],
    ));
    let est = DensityEstimate::from_json(
        &serde_json::from_str(&fs::read_to_string(dir.path().join("est.json")).unwrap()).unwrap(),
    )
    .unwrap();
    let text = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,f"));
    let mut count = 0;
    for line in lines {
        let (x, f) = line.split_once(',').unwrap();
        let x: f64 = x.parse().unwrap();
        let f: f64 = f.parse().unwrap();
        assert_eq!(f.to_bits(), est.eval(&[x]).unwrap().to_bits(), "x = {x}");
        count += 1;
    }
    assert_eq!(count, 41);
}

#[test]
fn exterior_point_evaluates_to_zero() {
    let dir = TempDir::new().unwrap();
    simulate_irwin_hall(dir.path());
    ok(&kseries(dir.path(), &["fit", "moments.json", "--reference", UNIFORM_03, "-o", "est.json"]));
    fs::write(dir.path().join("pts.csv"), "x\n7.5\n").unwrap();
    let out = ok(&kseries(dir.path(), &["eval", "est.json", "--grid", "pts.csv"]));
    assert_eq!(out, "x1,f\n7.5,0\n");
}

#[test]
fn commands_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [a.path(), b.path()] {
        simulate_irwin_hall(dir);
        ok(&kseries(dir, &["fit", "moments.json", "--reference", UNIFORM_03, "-o", "est.json"]));
        ok(&kseries(
            dir,
            &["test", "energy", "est.json", "observations.csv", "--draws", "300", "--permutations", "99", "--seed", "4", "-o", "r.json"],
        ));
    }
    for f in ["moments.json", "observations.csv", "est.json", "r.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let run = |threads: &str, out: &str| {
        ok(&kseries(
            dir.path(),
            &["--threads", threads, "simulate", "robot", "-t", "5", "-r", "500", "--degrees", "2", "--out", out],
        ));
        fs::read(dir.path().join(out).join("moments.json")).unwrap()
    };
    assert_eq!(run("1", "one"), run("3", "three"));
}

#[test]
fn table_from_config() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("exp.json"),
        r#"{"rows":[{"target":{"family":"truncated_exponential","params":{"rate":0.6666666666666666},"support":[0,4]},
                    "reference":{"family":"uniform","support":[0,4]},"moments":[4]},
                   {"target":{"family":"continuous_bernoulli","params":{"p":0.3}},
                    "reference":"gram_charlier","moments":[5]}]}"#,
    )
    .unwrap();
    let text = ok(&kseries(
        dir.path(),
        &["table", "--config", "exp.json", "--n", "200", "--seed", "1", "-o", "t.csv"],
    ));
    assert_eq!(text.lines().count(), 3);
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(csv.starts_with("target,reference,moments,ks_distance"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn examples_lists_and_shows() {
    let dir = TempDir::new().unwrap();
    let list = ok(&kseries(dir.path(), &["examples"]));
    assert!(list.lines().any(|l| l.starts_with("irwin_hall")));
    let src = ok(&kseries(dir.path(), &["examples", "--show", "irwin_hall"]));
    assert!(src.contains("while (True):"));
    assert_eq!(kseries(dir.path(), &["examples", "--show", "missing"]).status.code(), Some(2));
}

#[test]
fn zeroth_moment_only_gives_reference_pdf() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("m.json"), r#"{"degrees":[0],"values":[1.0]}"#).unwrap();
    let tn = r#"{"family":"truncated_normal","params":{"mean":0.5,"variance":2},"support":[-1,3]}"#;
    ok(&kseries(dir.path(), &["fit", "m.json", "--reference", tn, "-o", "est.json"]));
    let out = ok(&kseries(dir.path(), &["eval", "est.json", "--linspace", "-1,3,9"]));
    let reference = kseries::distributions::ReferenceDistribution::from_json_str(tn).unwrap();
    for line in out.lines().skip(1) {
        let (x, f) = line.split_once(',').unwrap();
        let (x, f): (f64, f64) = (x.parse().unwrap(), f.parse().unwrap());
        assert!((f - reference.pdf(x)).abs() < 1e-14, "x = {x}");
    }
}
