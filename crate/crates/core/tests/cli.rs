use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn rfterm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfterm")).args(args).env_remove("RFTERM_CACHE_DIR").output().unwrap()
}

fn ok(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

// A three-level toy curve that diagonalizes in milliseconds.
const SMALL_PEC: &str = r#"
name = "small_pec"
[pec]
center = { n = 45, l = 2, j = 2.5, m = 2.5 }
r_min_nm = 150.0
r_max_nm = 200.0
points = 6
site_shifts = false
[pec.basis]
m_max = 2.5
manifolds = [{ kind = "level", n = 45, l = 2, j = 2.5 }, { kind = "level", n = 47, l = 0, j = 0.5 }]
"#;

#[test]
fn gate_on_implementation_point() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenarios().join("implementation.toml");
    let s = ok(&rfterm(&["gate", "--scenario", path_str(&scenario), "--out", path_str(dir.path()), "--trajectory"]));
    let f = s["fidelity"].as_f64().unwrap();
    assert!(f > 0.99 && f <= 1.0, "{f}");
    let gate = read_json(&dir.path().join("gate.json"));
    assert!(gate.is_object());
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "gate");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    let traj = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(traj.lines().next().unwrap().starts_with("config,t_us,pop_s0"));
    assert!(traj.lines().count() > 10);
}

#[test]
fn blocked_input_leaves_no_early_photon() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenarios().join("implementation.toml");
    let s = ok(&rfterm(&["gate", "--scenario", path_str(&scenario), "--out", path_str(dir.path()), "--logical", "1L"]));
    let pops = &s["logical_populations"][0];
    assert_eq!(pops["logical"], 1);
    assert!(pops["p_early"].as_f64().unwrap() < 0.01, "{pops}");
    assert!(pops["p_late"].as_f64().unwrap() > 0.9, "{pops}");
}

#[test]
fn malformed_amplitudes_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.toml");
    std::fs::write(&scenario, "[input]\nlogical_amplitudes = [[1.0, 0.0], [1.0, 0.0]]\n").unwrap();
    let out = rfterm(&["gate", "--scenario", path_str(&scenario), "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("defect"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_species_file_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.toml");
    std::fs::write(&scenario, "species_file = \"nowhere/cs.toml\"\n").unwrap();
    let out = rfterm(&["gate", "--scenario", path_str(&scenario), "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere/cs.toml"));
}

#[test]
fn out_of_range_tolerance_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = rfterm(&["gate", "--out", path_str(dir.path()), "--tol", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn swap_of_ideal_terminals_is_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenarios().join("swap_ideal.toml");
    ok(&rfterm(&["swap", "--scenario", path_str(&scenario), "--out", path_str(dir.path())]));
    let report = read_json(&dir.path().join("swap.json"));
    let text = report.to_string();
    let mut probs = Vec::new();
    collect_probabilities(&report, &mut probs);
    assert_eq!(probs.len(), 4, "{text}");
    for p in probs {
        assert!((p - 0.25).abs() < 1e-9, "{text}");
    }
}

fn collect_probabilities(v: &Value, acc: &mut Vec<f64>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if k == "probability" {
                    acc.extend(x.as_f64());
                } else {
                    collect_probabilities(x, acc);
                }
            }
        }
        Value::Array(a) => a.iter().for_each(|x| collect_probabilities(x, acc)),
        _ => {}
    }
}

#[test]
fn sigma_sweep_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenarios().join("implementation.toml");
    let s = &["sweep", "--scenario", path_str(&scenario), "--out", path_str(dir.path()), "--axis", "sigma", "--values", "1,2,3.5"];
    ok(&rfterm(s));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].starts_with("value,"));
    assert_eq!(rows.len(), 4);
}

#[test]
fn regime_panels_write_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    ok(&rfterm(&["fig3", "--out", path_str(dir.path())]));
    for p in ["a", "b", "c"] {
        let csv = std::fs::read_to_string(dir.path().join(format!("fig3_{p}.csv"))).unwrap();
        assert!(csv.lines().filter(|l| !l.starts_with('#')).count() > 5, "panel {p}");
    }
}

#[test]
fn repeated_pec_hits_cache_with_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("pec.toml");
    std::fs::write(&scenario, SMALL_PEC).unwrap();
    let cache = dir.path().join("cache");
    let run = |out: &str| {
        let o = dir.path().join(out);
        let s = ok(&rfterm(&["pec", "--scenario", path_str(&scenario), "--out", path_str(&o), "--cache", path_str(&cache)]));
        (s, std::fs::read(o.join("pec.csv")).unwrap())
    };
    let (first, a) = run("a");
    let (second, b) = run("b");
    assert_eq!(first["curve_cache_hit"], false);
    assert_eq!(second["curve_cache_hit"], true);
    assert_eq!(a, b);
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("pec.toml");
    std::fs::write(&scenario, SMALL_PEC).unwrap();
    let cache = dir.path().join("env-cache");
    let out = Command::new(env!("CARGO_BIN_EXE_rfterm"))
        .args(["pec", "--scenario", path_str(&scenario), "--out", path_str(&dir.path().join("o"))])
        .env("RFTERM_CACHE_DIR", &cache)
        .output()
        .unwrap();
    ok(&out);
    assert!(std::fs::read_dir(&cache).unwrap().any(|e| e.unwrap().file_name().to_string_lossy().starts_with("pec-")));
}

#[test]
fn concurrent_processes_share_one_cache() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("pec.toml");
    std::fs::write(&scenario, SMALL_PEC).unwrap();
    let cache = dir.path().join("cache");
    let handles: Vec<_> = (0..6)
        .map(|i| {
            let scenario = scenario.clone();
            let cache = cache.clone();
            let out = dir.path().join(format!("p{i}"));
            std::thread::spawn(move || {
                Command::new(env!("CARGO_BIN_EXE_rfterm"))
                    .args(["pec", "--scenario", path_str(&scenario), "--workers", "1"])
                    .args(["--out", path_str(&out), "--cache", path_str(&cache)])
                    .output()
                    .unwrap()
            })
        })
        .collect();
    let mut bodies = Vec::new();
    for (i, h) in handles.into_iter().enumerate() {
        ok(&h.join().unwrap());
        bodies.push(std::fs::read(dir.path().join(format!("p{i}/pec.csv"))).unwrap());
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
    let entries: Vec<_> = std::fs::read_dir(&cache).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 1, "{entries:?}");
    let entry = read_json(&entries[0]);
    assert!(entry["key"].is_string());
}

#[test]
fn bundled_sigma_scan_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenarios().join("sweep_sigma.toml");
    ok(&rfterm(&["sweep", "--scenario", path_str(&scenario), "--out", path_str(dir.path())]));
    let table = read_json(&dir.path().join("sweep.json"));
    let f: Vec<f64> = table["rows"].as_array().unwrap().iter().map(|r| r["fidelity"].as_f64().unwrap()).collect();
    assert!(f.len() >= 5);
    assert!(f.windows(2).all(|w| w[1] >= w[0]), "{f:?}");
}
