use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn kp(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kp"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("KP_THREADS", n),
        None => cmd.env_remove("KP_THREADS"),
    };
    cmd.output().expect("kp runs")
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--config", config.to_str().unwrap(), "--output", out.to_str().unwrap(), "--quiet"];
    args.extend_from_slice(extra);
    kp(&args, None)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn validate_scenario_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&scenario("validate.toml"), tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(tmp.path());
    assert_eq!(m["passed"], true);
    assert_eq!(m["task"], "validate");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("validate.json")).unwrap()).unwrap();
    assert!(report["hypotheses"]["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn swapped_barriers_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&scenario("compare-swapped.toml"), tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("compare.json")).unwrap()).unwrap();
    assert_eq!(report["sandwich"]["verdict"], false);
    assert!(report["sandwich"]["slack"].as_f64().unwrap() < 0.0);
}

#[test]
fn unknown_model_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "task = \"validate\"\nmodel = \"no-such-model\"\n").unwrap();
    let out = run(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown model"), "{stderr}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn malformed_config_reports_location() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "task = \"validate\"\nmodel = \"affine\"\n[integrator]\nh = \"fast\"\nt_span = [0.0, 1.0]\n").unwrap();
    let out = run(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 4") && stderr.contains("h"), "{stderr}");
}

#[test]
fn blow_up_is_a_runtime_error_with_time() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("blow.toml");
    fs::write(
        &cfg,
        r#"
task = "evolve"
[model]
name = "explosive"
coefficient = { kind = "constant", value = 1.0 }
reaction = { f = [0.0, 0.0, 0.0, 1.0], f0 = [0.0, 0.0, 0.0, 1.0], f1 = [0.0, 0.0, 0.0, 1.0], b0 = 1.0, b1 = 1.0, c0 = 0.0, c1 = 0.0 }
[integrator]
h = 0.01
t_span = [0.0, 5.0]
[initial]
kind = "mode"
mode = 1
scale = 5.0
"#,
    )
    .unwrap();
    let out = run(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("blow-up at t ="), "{stderr}");
}

#[test]
fn artifacts_are_deterministic_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["evolve.toml", "equilibrate.toml"] {
        let (a, b) = (tmp.path().join(format!("{name}-a")), tmp.path().join(format!("{name}-b")));
        for (dir, threads) in [(&a, "1"), (&b, "3")] {
            let out =
                kp(&["run", "--config", scenario(name).to_str().unwrap(), "--output", dir.to_str().unwrap(), "--quiet"], Some(threads));
            assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        }
        let csvs: Vec<_> =
            fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).filter(|n| n.to_string_lossy().ends_with(".csv")).collect();
        assert!(!csvs.is_empty());
        for f in csvs {
            assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap(), "{name}: {f:?} differs");
        }
        assert_eq!(manifest(&a)["config_hash"], manifest(&b)["config_hash"]);
    }
}

#[test]
fn effective_config_reproduces_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    assert_eq!(run(&scenario("compare.toml"), &first, &["--seed", "11"]).status.code(), Some(0));
    let second = tmp.path().join("second");
    let out = run(&first.join("effective_config.toml"), &second, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(manifest(&first)["config_hash"], manifest(&second)["config_hash"]);
    assert_eq!(manifest(&second)["seed"], 11);
    assert_eq!(fs::read(first.join("middle.csv")).unwrap(), fs::read(second.join("middle.csv")).unwrap());

    let third = tmp.path().join("third");
    assert_eq!(run(&scenario("compare.toml"), &third, &[]).status.code(), Some(0));
    assert_ne!(manifest(&first)["config_hash"], manifest(&third)["config_hash"]);
}

#[test]
fn task_override_and_json_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("scenario.json");
    fs::write(&cfg, r#"{"task": "evolve", "model": "affine", "integrator": {"h": 0.05, "t_span": [0.0, 1.0]}}"#).unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&cfg, &out_dir, &["--task", "validate"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(manifest(&out_dir)["task"], "validate");
    assert!(out_dir.join("validate.json").exists());
}

#[test]
fn plotdata_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, "time,phi,c_1,c_2,l2,xhalf\n").unwrap();
    let out = kp(&["plotdata", "--input", empty.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "time,quantity,value\n");

    let run_dir = tmp.path().join("eq");
    assert_eq!(run(&scenario("equilibrate.toml"), &run_dir, &[]).status.code(), Some(0));
    let table = tmp.path().join("energy.csv");
    let out = kp(&["plotdata", "--input", run_dir.join("lyapunov.json").to_str().unwrap(), "--output", table.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let energies: Vec<f64> =
        fs::read_to_string(&table).unwrap().lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(energies.len() > 10);
    assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-8 * (1.0 + w[0].abs())));

    let missing = kp(&["plotdata", "--input", tmp.path().join("nope.json").to_str().unwrap()], None);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn attract_scenario_converges() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&scenario("attract.toml"), tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("attract.json")).unwrap()).unwrap();
    let d: Vec<f64> = report["semidistances"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]));
    assert!(*d.last().unwrap() < 1e-5);
    let members: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("attractor/manifest.json")).unwrap()).unwrap();
    for m in members["members"].as_array().unwrap() {
        assert!(tmp.path().join(m.as_str().unwrap()).exists());
    }
}
