use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hypomix"));
    c.env_remove("HYPOMIX_OUT");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().arg("--out-dir").arg(out).args(args).output().unwrap()
}

const SMALL: &str = r#"
model = "hypoelliptic"
k = 1
nu = 1e-2

[profile]
name = "couette"

[grid]
L = 10.0
N = 512

[time]
dt = 0.01
T = 2.0
sample_every = 10

[init]
kind = "gaussian_bump"
center = 0.0
width = 1.0
"#;

#[test]
fn constants_match_reference_values() {
    let out = bin().args(["constants", "--frakU", "1"]).output().unwrap();
    assert!(out.status.success());
    let v = json(&out.stdout);
    let led = &v["ledger"];
    let rel = |name: &str, want: f64| (led[name].as_f64().unwrap() / want - 1.0).abs();
    assert!(rel("alpha0", 7.1347e-5) < 1e-4);
    assert!(rel("eps0", 6.363e-10) < 1e-3);
    assert!(rel("nu0", 6.2e-19) < 0.02);
    let c0_sq = 20.0 / (led["delta0"].as_f64().unwrap() * led["gamma0"].as_f64().unwrap());
    assert!(rel("c0_sq", c0_sq) < 1e-14);
    assert_eq!(v["regime"], "both");
}

#[test]
fn constants_reject_small_frak_u() {
    let out = bin().args(["constants", "--frakU", "0.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out.stderr)["error"], "Invalid");
}

#[test]
fn certify_couette_and_sine() {
    let out = bin().args(["certify", "couette", "--L", "10"]).output().unwrap();
    assert!(out.status.success());
    let v = json(&out.stdout);
    assert_eq!(v["frak_u"], 1.0);
    assert_eq!(v["satisfied"], true);

    let out = bin()
        .args(["certify", "sine_perturbed", "--L", "10", "--param", "amplitude=0.5"])
        .output()
        .unwrap();
    let u = json(&out.stdout)["frak_u"].as_f64().unwrap();
    assert!((u - 2.0).abs() < 1e-6, "{u}");

    let out = bin().args(["certify", "constant", "--L", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out.stderr)["error"], "NonMonotone");

    let out = bin()
        .args(["certify", "couette", "--L", "1", "--param", "amplitude"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out.stderr)["error"], "Usage");
}

#[test]
fn verify_writes_reports_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", configs().join("couette_nu1e-3.toml").to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let id = "couette_k1_nu1e-3_hypoelliptic";
    let manifest = json(&std::fs::read(dir.path().join(format!("{id}.manifest.json"))).unwrap());
    for key in ["config", "ledger", "hypothesis", "tool_version", "started", "finished", "outputs", "exit_status", "source"] {
        assert!(manifest.get(key).is_some(), "manifest lacks {key}");
    }
    assert_eq!(manifest["exit_status"], 0);
    let outputs: Vec<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(outputs.len(), 7);
    for o in &outputs {
        if o.ends_with(".json") {
            let rep = json(&std::fs::read(dir.path().join(o)).unwrap());
            assert_eq!(rep["pass"], true, "{o}");
            assert_eq!(rep["trajectory_id"], id);
        }
    }
    // Every file in the directory is the manifest or listed in it exactly once.
    let mut counts = BTreeMap::new();
    for o in &outputs {
        *counts.entry(o.clone()).or_insert(0) += 1;
    }
    for e in std::fs::read_dir(dir.path()).unwrap() {
        let name = e.unwrap().file_name().to_string_lossy().into_owned();
        if !name.ends_with(".manifest.json") {
            assert_eq!(counts.get(&name), Some(&1), "{name}");
        }
    }
    let csv = std::fs::read_to_string(dir.path().join(format!("{id}.csv"))).unwrap();
    assert!(csv.starts_with("t,l2,weighted,hminus1,h1,j_l2,j_weighted,phi,jj,lyap,batchelor,res_energy"));
    assert_eq!(csv.lines().count(), 1 + 101);
}

#[test]
fn out_dir_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let target = dir.path().join("from_env");
    let out = bin()
        .env("HYPOMIX_OUT", &target)
        .arg("simulate")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("couette_k1_nu1e-2_hypoelliptic.csv").exists());
    assert!(target.join("couette_k1_nu1e-2_hypoelliptic.manifest.json").exists());
    let summary = json(&out.stdout);
    assert_eq!(summary["steps"], 200);
    assert_eq!(summary["monitors"].as_array().unwrap().len(), 0);
}

#[test]
fn f32_simulation_tracks_f64() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&["simulate", cfg.to_str().unwrap()], &a).status.success());
    let out = run(&["--precision", "f32", "simulate", cfg.to_str().unwrap()], &b);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let name = "couette_k1_nu1e-2_hypoelliptic.csv";
    let x = hypomix::io::read_timeseries::<f64>(&a.join(name)).unwrap();
    let y = hypomix::io::read_timeseries::<f32>(&b.join(name)).unwrap();
    assert_eq!(x.len(), y.len());
    for (p, q) in x.iter().zip(&y) {
        assert!((p.l2 - q.l2 as f64).abs() < 1e-4 * p.l2);
        assert!((p.hminus1 - q.hminus1 as f64).abs() < 1e-3 * p.hminus1);
    }
}

#[test]
fn oracle_and_sweep_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["oracle", configs().join("couette_oracle.toml").to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = hypomix::io::read_timeseries::<f64>(&dir.path().join("couette_k1_nu1e-2_full_laplacian_oracle.csv")).unwrap();
    assert_eq!(recs.iter().map(|r| r.t).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0, 5.0]);
    assert!(recs.windows(2).all(|w| w[1].l2 < w[0].l2));

    let out = run(&["oracle", configs().join("sine_inviscid.toml").to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out.stderr)["error"], "Invalid");

    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, format!("{}\n[sweep]\nnus = [1e-1, 1e-2, 1e-3]\n", SMALL.replace("L = 10.0", "L = 12.0"))).unwrap();
    let out = run(&["sweep", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&std::fs::read(dir.path().join("sweep_couette_k1_hypoelliptic.json")).unwrap());
    assert_eq!(rep["points"].as_array().unwrap().len(), 3);
    let e = rep["fit"]["exponent"].as_f64().unwrap();
    assert!((e + 1.0 / 3.0).abs() < 0.06, "{e}");

    std::fs::write(&cfg, format!("{SMALL}\n[sweep]\nnus = [1e-2, 1e-3]\n")).unwrap();
    let out = run(&["sweep", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out.stderr)["error"], "InsufficientSpan");
}

#[test]
fn bad_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, SMALL.replace("k = 1", "k = \"one\"")).unwrap();
    let out = run(&["simulate", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = json(&out.stderr);
    assert_eq!(err["error"], "Config");
    assert!(err["message"].as_str().unwrap().contains("bad.toml"));

    std::fs::write(&cfg, SMALL.replace("width = 1.0", "width = 5.0")).unwrap();
    let out = run(&["verify", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out.stderr)["error"], "Invalid");
}
