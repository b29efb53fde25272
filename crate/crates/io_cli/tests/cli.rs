use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", &format!("{name}.txt")].iter().collect();
    p.to_string_lossy().into_owned()
}

fn rotcut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotcut")).args(args).env_remove("ROTCUT_BUDGET").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn mwsm_on_fig1() {
    let o = rotcut(&["solve-mwsm", &fixture("fig1"), "--weights", "student-rank"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("match a1 b1\nmatch a2 b2\n"), "{out}");
    assert!(out.ends_with("value 5\n"), "{out}");
}

#[test]
fn certify_prints_the_failed_condition_and_exits_4() {
    let o = rotcut(&["certify", &fixture("fig5"), "--objective", "activity-mismatch"]);
    assert_eq!(o.status.code(), Some(4));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "not-representable");
    assert_eq!(v["certificate"]["condition"], "ii");
    assert_eq!(v["certificate"]["value"], "-3");

    let o = rotcut(&["certify", &fixture("fig6"), "--family", "activity-stable"]);
    assert_eq!(o.status.code(), Some(4));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certificate"]["condition"], "i");
    assert_eq!(v["certificate"]["operation"], "join");

    let o = rotcut(&["certify", &fixture("fig1")]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "representable");
}

#[test]
fn exit_codes_separate_input_errors_from_infeasibility() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.txt", "students: a\nschools: b\npref a: b\npref b: a @\n");
    let o = rotcut(&["solve-mwsm", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{:?}", o.stderr);

    assert_eq!(rotcut(&["solve-mwsm", "/nonexistent/file"]).status.code(), Some(2));
    assert_eq!(rotcut(&["solve-mssp", &fixture("fig1")]).status.code(), Some(2));
    assert_eq!(rotcut(&["no-such-command"]).status.code(), Some(2));

    // Two siblings who rank the activities in the same order but can never
    // share one: the only stable matching splits them.
    let split = write_temp(
        &dir,
        "split.txt",
        "students: x y\nschools: u v\npref x: u v @\npref y: u v @\npref u: y x @\npref v: x y @\n\
         pair x y\nactivity p: u\nactivity q: v\n",
    );
    assert_eq!(rotcut(&["solve-mssp", &split]).status.code(), Some(3));
    assert_eq!(rotcut(&["solve-msdp-bf", &split]).status.code(), Some(3));
}

#[test]
fn msss_and_msdp_on_their_fixtures() {
    let o = rotcut(&["solve-msss", &fixture("fig2")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("separated 1"), "{}", stdout(&o));
    let o = rotcut(&["solve-msdp-bf", &fixture("fig6")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn two_stage_explicit_and_sampled() {
    let o = rotcut(&["solve-2sto", &fixture("ex1")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.ends_with("value 0\n"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("first ")).count(), 5);

    let dir = tempfile::tempdir().unwrap();
    let scn = write_temp(&dir, "s.txt", "scenario only p=1\nkeep-students a1 a2\n");
    let o = rotcut(&["solve-2sto", &fixture("ex1"), "--scenarios", &scn]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let args = [
        "solve-2sto",
        &fixture("ex1"),
        "--sampler",
        "depart-prob=0.25",
        "--eps",
        "40",
        "--alpha",
        "1/10",
        "--seed",
        "4",
    ];
    let a = rotcut(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&rotcut(&args)));
    let capped = Command::new(env!("CARGO_BIN_EXE_rotcut")).args(args).env("ROTCUT_BUDGET", "3").output().unwrap();
    assert!(stdout(&capped).contains("samples 3 of"), "{}", stdout(&capped));
    assert!(stdout(&capped).contains("capped by budget"));

    assert_eq!(rotcut(&["solve-2sto", &fixture("ex1"), "--sampler", "depart-prob=0.25"]).status.code(), Some(2));
    assert_eq!(rotcut(&["solve-2sto", &fixture("ex1"), "--lambda", "-1"]).status.code(), Some(2));
    assert_eq!(rotcut(&["solve-2sto", &fixture("fig1")]).status.code(), Some(2));
}

#[test]
fn digraph_dump_lines() {
    let o = rotcut(&["dump-digraph", &fixture("ex1"), "--objective", "two-stage", "--merge"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("# constant 13/2 gamma 3/2"));
    for l in lines {
        let f: Vec<&str> = l.split(' ').collect();
        assert_eq!(f.len(), 3, "{l}");
        assert!(f[..2].iter().all(|v| *v == "s" || *v == "t" || v.parse::<usize>().is_ok()), "{l}");
        assert!(f[2] == "inf" || f[2].split('/').all(|x| x.parse::<u64>().is_ok()), "{l}");
    }
    let o = rotcut(&["dump-digraph", &fixture("ex1"), "--objective", "two-stage", "--gamma", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = rotcut(&["dump-digraph", &fixture("fig5"), "--objective", "activity-mismatch"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn rotations_of_fig1() {
    let out = stdout(&rotcut(&["dump-rotations", &fixture("fig1")]));
    assert!(out.starts_with("m0 a1-b1 a2-b2 a3-b3 a4-b4 a5-b5\nmz a1-b4 a2-b3 a3-b2 a4-b1 a5-b5\n"));
    assert_eq!(out.lines().filter(|l| l.starts_with("rotation ")).count(), 6);
    assert!(out.contains("cover 0 2\n"));
}

#[test]
fn generated_files_parse_and_repeat() {
    let a = rotcut(&["generate", "--n", "6", "--seed", "9", "--max-quota", "2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&rotcut(&["generate", "--n", "6", "--seed", "9", "--max-quota", "2"])));
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(&dir, "g.txt", &stdout(&a));
    assert_eq!(stdout(&rotcut(&["canon", &p])), stdout(&a));
    assert_eq!(rotcut(&["generate", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn experiment_csv_is_reproducible() {
    let args = ["experiment", "--n", "6", "--trials", "2", "--samples", "3", "--lambdas", "0.5,1", "--seed", "2"];
    let a = rotcut(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(stdout(&a), stdout(&rotcut(&args)));
    assert_eq!(stdout(&a).lines().count(), 5);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let mut with_out: Vec<&str> = args.to_vec();
    let path = out.to_string_lossy().into_owned();
    with_out.extend(["--out", &path]);
    assert_eq!(rotcut(&with_out).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout(&a));
    assert_eq!(rotcut(&["experiment", "--p", "2"]).status.code(), Some(2));
}
