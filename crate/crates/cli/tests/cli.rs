use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_klucb-switch"));
    c.env_remove("BANDIT_SWITCH_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

const SMALL: &str = r#"{
  "arms": [
    {"kind": "bernoulli", "p": 0.9},
    {"kind": "trunc_gauss", "mean": 0.7, "sigma": 0.1},
    {"kind": "discrete", "values": [0, 0.5, 1], "probs": [0.3, 0.4, 0.3]}
  ],
  "horizon": 300,
  "runs": 12,
  "seed": 7,
  "policies": [
    {"family": "klucb-switch"},
    {"family": "klucb-switch-anytime", "exploration": "log_plus", "switch_exponent": 0.8888888888888888, "switch_floor": "inner"},
    {"family": "imed"},
    {"family": "ucb"}
  ]
}"#;

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_is_reproducible_and_meta_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL);
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    for out in [&a, &b] {
        let o = run(&["run", &cfg, "--out-dir", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let csv_a = fs::read(a.join("regret.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("regret.csv")).unwrap());
    let text = String::from_utf8(csv_a.clone()).unwrap();
    assert!(text.starts_with("policy,t,mean_regret,stderr,runs\n"));

    let meta = a.join("meta.json");
    let o = run(&[
        "run",
        meta.to_str().unwrap(),
        "--out-dir",
        c.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_a, fs::read(c.join("regret.csv")).unwrap());
    assert_eq!(
        fs::read(&meta).unwrap(),
        fs::read(c.join("meta.json")).unwrap()
    );

    let echoed: serde_json::Value = serde_json::from_slice(&fs::read(meta).unwrap()).unwrap();
    assert!(echoed["generated_by"]
        .as_str()
        .unwrap()
        .starts_with("klucb-switch "));
    assert_eq!(echoed["runs"], 12);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL);
    let one = dir.path().join("one");
    let three = dir.path().join("three");
    let o = run(&[
        "run",
        &cfg,
        "--parallelism",
        "1",
        "--out-dir",
        one.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = bin()
        .args(["run", &cfg, "--out-dir", three.to_str().unwrap()])
        .env("BANDIT_SWITCH_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("3 thread(s)"));
    assert_eq!(
        fs::read(one.join("regret.csv")).unwrap(),
        fs::read(three.join("regret.csv")).unwrap()
    );
}

#[test]
fn seed_and_runs_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL);
    let out = dir.path().join("o");
    let o = run(&[
        "run",
        &cfg,
        "--seed",
        "99",
        "--runs",
        "3",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(
        (meta["seed"].as_u64(), meta["runs"].as_u64()),
        (Some(99), Some(3))
    );
    let csv = fs::read_to_string(out.join("regret.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",3")));
}

#[test]
fn malformed_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write_config(
        dir.path(),
        "typo.json",
        r#"{"preset": "fig1-left", "horizn": 10}"#,
    );
    let o = run(&["run", &typo]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("horizn"), "{}", stderr(&o));

    let bad_arm = write_config(
        dir.path(),
        "arm.json",
        "{\n  \"arms\": [{\"kind\": \"bernoulli\", \"p\": 1.5}],\n  \"horizon\": 5\n}",
    );
    let o = run(&["run", &bad_arm]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("arms[0]") && stderr(&o).contains("line 2"),
        "{}",
        stderr(&o)
    );

    let missing = dir.path().join("nope.json");
    assert_eq!(
        run(&["run", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let no_sweep = write_config(dir.path(), "s.json", SMALL);
    assert_eq!(run(&["sweep", &no_sweep]).status.code(), Some(2));
}

#[test]
fn sweep_writes_one_block_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.json",
        r#"{"preset": "fig2-left", "horizon": 200, "runs": 4,
            "sweep": {"param": "x", "values": [0.5, 1.0]}}"#,
    );
    let out = dir.path().join("o");
    let o = run(&["sweep", &cfg, "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "sweep_param,sweep_value,policy,normalized_regret");
    assert_eq!(lines.len(), 1 + 2 * 5);
    assert!(lines[1].starts_with("x,0.5,UCB,"));
    assert!(lines[6].starts_with("x,1,UCB,"));
}

#[test]
fn unknown_suite_exits_with_two() {
    let o = run(&["verify", "everything"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown suite"));
}

#[test]
fn verify_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "verify",
        "lambert-w",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS criterion 10"));
    let csv = fs::read_to_string(dir.path().join("verify_lambert-w.csv")).unwrap();
    assert!(csv.starts_with(
        "criterion,bound_name,subject,n,param,empirical,bound,margin,stderr,violation,runs\n"
    ));
    assert!(csv.lines().skip(1).all(|l| l.contains(",false,")));
}

#[test]
fn reduced_fidelity_smoke_run_of_every_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "verify",
        "all",
        "--runs",
        "100",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let lines: Vec<&str> = stdout
        .lines()
        .filter(|l| l.starts_with("PASS ") || l.starts_with("FAIL "))
        .collect();
    assert_eq!(lines.len(), 13, "{stdout}\n{}", stderr(&o));
    let all_pass = lines.iter().all(|l| l.starts_with("PASS"));
    assert_eq!(
        o.status.code(),
        Some(if all_pass { 0 } else { 1 }),
        "{stdout}"
    );
    for c in ["1", "2", "3", "6", "7", "10"] {
        assert!(
            stdout.contains(&format!("PASS criterion {c:>2}:")),
            "{stdout}"
        );
    }
    assert!(dir.path().join("verify_all.csv").exists());
}
