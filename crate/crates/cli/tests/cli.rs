use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn netplace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netplace"))
        .args(args)
        .env("NETPLACE_THREADS", "0")
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = netplace(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn ids(v: &Value) -> Vec<u64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect()
}

fn star() -> String {
    fixture("star4.toml").display().to_string()
}

fn write_system(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn check_example_verdicts() {
    let r = report(&["check", &star(), "--actuators", "3,4"]);
    assert_eq!(r["command"], "check");
    assert_eq!(r["result"]["structurally_controllable"], true);
    assert_eq!(r["result"]["matching_size"], 4);
    assert_eq!(r["result"]["k_min"], 2);
    assert_eq!(r["result"]["scc"]["source_count"], 1);

    let r = report(&["check", &star()]);
    assert_eq!(r["result"]["structurally_controllable"], false);

    let r = report(&["check", &star(), "-s", "1"]);
    assert_eq!(r["result"]["structurally_controllable"], false);
    assert_eq!(r["result"]["matching_size"], 2);
}

#[test]
fn place_modular_example() {
    let r = report(&[
        "place",
        &star(),
        "--k",
        "2",
        "--method",
        "fg",
        "--metric",
        "modular",
        "--weights",
        "10,1,5,2",
    ]);
    assert_eq!(ids(&r["result"]["set"]), vec![3, 4]);
    assert_eq!(r["result"]["in_c_k"], true);
    let trace = r["result"]["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 2);
    assert_eq!(ids(&trace[0]["rejected"]), vec![1]);
    assert_eq!(r["result"]["value"], "1.10000000000e1");
}

#[test]
fn place_gramian_long_horizon() {
    let r = report(&["place", &star(), "--k", "2"]);
    assert_eq!(r["input"]["config"]["method"], "lhfg");
    assert_eq!(r["input"]["config"]["horizon"], "full");
    assert_eq!(r["result"]["structurally_controllable"], true);
    assert!(r["result"]["trace"][0]["rollout"].is_string());
}

#[test]
fn budget_errors_are_usage_errors() {
    for k in ["0", "5"] {
        let out = netplace(&["place", &star(), "--k", k]);
        assert_eq!(out.status.code(), Some(2), "k = {k}");
    }
    let out = netplace(&["place", &star(), "--k", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("below the 2"));
}

#[test]
fn two_sources_each_get_an_actuator() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_system(
        dir.path(),
        "two_sources.toml",
        "format = \"netplace-system/1\"\nn = 3\nedges = [[1, 3, 1.0], [2, 3, 1.0], [1, 1, 1.0], [2, 2, 1.0]]\n",
    );
    let r = report(&["check", &path]);
    assert_eq!(r["result"]["scc"]["source_count"], 2);
    let r = report(&["place", &path, "--k", "2", "--method", "fg"]);
    assert_eq!(ids(&r["result"]["initial"]), vec![1, 2]);
    assert_eq!(ids(&r["result"]["set"]), vec![1, 2]);
    assert_eq!(r["result"]["structurally_controllable"], true);
}

#[test]
fn empty_candidate_names_the_component() {
    let dir = tempfile::tempdir().unwrap();
    // Three disconnected self-loops: one actuator suffices for matching
    // but each loop is its own source component.
    let path = write_system(
        dir.path(),
        "loops.toml",
        "format = \"netplace-system/1\"\nn = 3\nedges = [[1, 1, 1.0], [2, 2, 1.0], [3, 3, 1.0]]\n",
    );
    let out = netplace(&["place", &path, "--k", "1", "--method", "fg"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("source component [2]"), "{err}");
}

#[test]
fn backup_example() {
    let r = report(&["backup", &star(), "--actuators", "3,4", "--mode", "exact"]);
    assert_eq!(ids(&r["result"]["essential"]), vec![3, 4]);
    assert_eq!(ids(&r["result"]["backups"]), vec![2]);
    assert_eq!(r["result"]["mode"], "exact");
    let families = r["result"]["families"].as_array().unwrap();
    assert_eq!(ids(&families[0]["positions"]), vec![2, 3]);
    assert_eq!(ids(&families[1]["positions"]), vec![2, 4]);
    for c in r["result"]["certificates"].as_array().unwrap() {
        assert_eq!(c["backup"], 2);
    }
}

#[test]
fn backup_redundant_and_uncontrollable() {
    let r = report(&["backup", &star(), "-s", "1,2,3,4"]);
    assert!(r["result"]["essential"].as_array().unwrap().is_empty());
    assert!(r["result"]["backups"].as_array().unwrap().is_empty());

    let out = netplace(&["backup", &star(), "-s", "4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not structurally controllable"));
}

#[test]
fn metric_zero_dynamics() {
    let zero = fixture("zero2.toml").display().to_string();
    let r = report(&[
        "metric",
        &zero,
        "-s",
        "1,2",
        "--T",
        "1",
        "--epsilon",
        "1e-12",
    ]);
    let v: f64 = r["result"]["value"].as_str().unwrap().parse().unwrap();
    assert!((v - 2.0).abs() < 1e-9, "{v}");
    let r = report(&["metric", &zero, "--T", "1", "--epsilon", "1e-12"]);
    assert_eq!(r["result"]["value"], "2.00000000000e12");
}

#[test]
fn metric_factorization_failure_is_numerical() {
    let dir = tempfile::tempdir().unwrap();
    // Nodes 1 and 2 follow identical trajectories, so the Gramian is
    // singular and an epsilon of 1e-300 vanishes next to its entries.
    let path = write_system(
        dir.path(),
        "twins.toml",
        "format = \"netplace-system/1\"\nn = 3\nedges = [[3, 1, 1.0], [3, 2, 1.0], [3, 3, -1.0]]\n",
    );
    let out = netplace(&["metric", &path, "-s", "3", "--epsilon", "1e-300"]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("raise epsilon"));
}

/// `e^{At}` by a plain Taylor series; adequate for the small norms here.
fn taylor_expm(a: &[Vec<f64>], t: f64) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect())
        .collect();
    let mut term = out.clone();
    for k in 1..60 {
        term = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|l| term[i][l] * a[l][j]).sum::<f64>() * t / k as f64)
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in 0..n {
                out[i][j] += term[i][j];
            }
        }
    }
    out
}

fn trace_inverse(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect())
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
            .unwrap();
        m.swap(c, p);
        inv.swap(c, p);
        let d = m[c][c];
        for j in 0..n {
            m[c][j] /= d;
            inv[c][j] /= d;
        }
        for r in (0..n).filter(|&r| r != c) {
            let f = m[r][c];
            for j in 0..n {
                m[r][j] -= f * m[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    (0..n).map(|i| inv[i][i]).sum()
}

#[test]
fn metric_example_matches_quadrature() {
    let a = vec![
        vec![0.0, -0.5, -0.8, -0.6],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
    ];
    let actuators = [2usize, 3];
    // Composite Simpson on 2000 panels of e^{At} B Bᵀ e^{Aᵀt}.
    let panels = 2000;
    let h = 1.0 / panels as f64;
    let mut w = vec![vec![0.0; 4]; 4];
    for p in 0..=panels {
        let coef = if p == 0 || p == panels {
            1.0
        } else if p % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let e = taylor_expm(&a, p as f64 * h);
        for i in 0..4 {
            for j in 0..4 {
                let v: f64 = actuators.iter().map(|&k| e[i][k] * e[j][k]).sum();
                w[i][j] += coef * h / 3.0 * v;
            }
        }
    }
    for (i, row) in w.iter_mut().enumerate() {
        row[i] += 1e-12;
    }
    let oracle = trace_inverse(w);

    let r = report(&["metric", &star(), "-s", "3,4"]);
    let v: f64 = r["result"]["value"].as_str().unwrap().parse().unwrap();
    assert!((v - oracle).abs() <= 1e-6 * oracle.abs(), "{v} vs {oracle}");
    assert_eq!(r["result"]["metric"]["kind"], "gramian");
}

fn strip_timings(bytes: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn reports_are_stable_across_runs_and_threads() {
    let args = ["place", &star(), "--k", "3", "--method", "lhfg"];
    let first = netplace(&args);
    let second = netplace(&args);
    let parallel = Command::new(env!("CARGO_BIN_EXE_netplace"))
        .args(args)
        .env("NETPLACE_THREADS", "4")
        .output()
        .unwrap();
    let a = strip_timings(&first.stdout);
    assert_eq!(a, strip_timings(&second.stdout));
    assert_eq!(a, strip_timings(&parallel.stdout));
    assert_eq!(
        serde_json::to_string_pretty(&a).unwrap(),
        serde_json::to_string_pretty(&strip_timings(&second.stdout)).unwrap()
    );
}

#[test]
fn out_flag_and_input_echo() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = netplace(&[
        "check",
        &star(),
        "-s",
        "3,4",
        "--seed",
        "7",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(r["input"]["config"]["seed"], 7);
    let hash = r["input"]["system_sha256"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
}

#[test]
fn parse_errors_exit_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_system(
        dir.path(),
        "bad.toml",
        "format = \"netplace-system/1\"\nn = 2\nedges = [\n  [1, 2, 1.0],\n  [1, 5, 1.0],\n]\n",
    );
    let out = netplace(&["check", &path]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5, column 3"), "{err}");

    let out = netplace(&["check", &star(), "-s", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = netplace(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_variable_is_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_netplace"))
        .args(["place", &star(), "--k", "2"])
        .env("NETPLACE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
