use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_ssepclt");

const HEADLINE: &str = r#"
[experiment]
d = 1
n_list = [4, 8, 16, 32]
t = 0.1
engine = "exact_two_point"
master_seed = 7

[[rho0]]
k = [0]
amplitude = 0.5

[[rho0]]
k = [1]
amplitude = 0.3

[observable]
kind = "quadratic"
terms = [{ weight = 1.0, phi = [{ k = [1], amplitude = 1.4142135623730951 }] }]
"#;

fn constant_profile(d: usize, c: f64, n_list: &str, t: f64, extra: &str) -> String {
    let zero = vec!["0"; d].join(", ");
    let one: Vec<&str> = std::iter::once("1").chain(vec!["0"; d - 1]).collect();
    format!(
        r#"
[experiment]
d = {d}
n_list = {n_list}
t = {t:?}
{extra}

[[rho0]]
k = [{zero}]
amplitude = {c}

[observable]
kind = "linear"
phi = [{{ k = [{}], amplitude = 1.0 }}]
"#,
        one.join(", ")
    )
}

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self {
            dir: TempDir::new().unwrap(),
        }
    }

    fn write(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, sub: &str, config: &Path, out: &str, extra: &[&str]) -> i32 {
        let output = Command::new(BIN)
            .arg(sub)
            .arg("--config")
            .arg(config)
            .arg("--out-dir")
            .arg(self.path(out))
            .args(extra)
            .env_remove("SSEPCLT_OUT_DIR")
            .output()
            .unwrap();
        output.status.code().expect("exit code")
    }

    fn read(&self, out: &str, file: &str) -> String {
        fs::read_to_string(self.path(out).join(file)).unwrap()
    }
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn comment(text: &str, key: &str) -> String {
    let prefix = format!("# {key}: ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} line"))
        .to_string()
}

#[test]
fn simulate_at_time_zero_echoes_initial_configuration() {
    let sb = Sandbox::new();
    let cfg = sb.write("min.toml", &constant_profile(1, 0.5, "[1]", 0.0, ""));
    assert_eq!(sb.run("simulate", &cfg, "out", &[]), 0);
    let csv = sb.read("out", "simulate_n1.csv");
    let lines = data_lines(&csv);
    assert_eq!(lines[0], "time,site,occupancy,rho,zeta");
    assert_eq!(lines.len(), 4);
    for (x, line) in lines[1..].iter().enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0].parse::<f64>().unwrap(), 0.0);
        assert_eq!(f[1], x.to_string());
        let eta: f64 = f[2].parse().unwrap();
        assert!(eta == 0.0 || eta == 1.0);
        assert_eq!(f[3].parse::<f64>().unwrap(), 0.5);
        let zeta: f64 = f[4].parse().unwrap();
        assert!((zeta - 3f64.sqrt() * (eta - 0.5)).abs() < 1e-15);
    }
    let manifest = sb.read("out", "manifest.json");
    assert!(manifest.contains("\"wall_clock_unix\""));
}

#[test]
fn missing_key_is_a_config_error() {
    let sb = Sandbox::new();
    let text = constant_profile(1, 0.5, "[1]", 0.0, "").replace("t = 0.0\n", "");
    let cfg = sb.write("bad.toml", &text);
    assert_eq!(sb.run("simulate", &cfg, "out", &[]), 2);
}

#[test]
fn density_outside_unit_interval_is_a_config_error() {
    let sb = Sandbox::new();
    let cfg = sb.write("bad.toml", &constant_profile(1, 1.2, "[2]", 0.0, ""));
    assert_eq!(sb.run("simulate", &cfg, "out", &[]), 2);
}

#[test]
fn same_seed_reproduces_files_byte_for_byte() {
    let sb = Sandbox::new();
    let cfg = sb.write(
        "sim.toml",
        &constant_profile(1, 0.3, "[2, 4]", 0.05, "snapshots = 3"),
    );
    assert_eq!(sb.run("simulate", &cfg, "a", &["--seed", "11"]), 0);
    assert_eq!(sb.run("simulate", &cfg, "b", &["--seed", "11"]), 0);
    assert_eq!(sb.run("simulate", &cfg, "c", &["--seed", "12"]), 0);
    for f in ["simulate_n2.csv", "simulate_n4.csv"] {
        assert_eq!(sb.read("a", f), sb.read("b", f));
    }
    assert_ne!(
        sb.read("a", "simulate_n4.csv"),
        sb.read("c", "simulate_n4.csv")
    );
}

#[test]
fn headline_exact_configuration_passes() {
    let sb = Sandbox::new();
    let cfg = sb.write("headline.toml", HEADLINE);
    assert_eq!(sb.run("verify-rate", &cfg, "out", &[]), 0);
    let table = sb.read("out", "error_table.csv");
    assert_eq!(data_lines(&table).len(), 5);
    let fit: serde_json::Value = serde_json::from_str(&sb.read("out", "rate_fit.json")).unwrap();
    assert_eq!(fit["passed"], true);
    assert!(fit["fit"]["slope"].as_f64().unwrap() < -0.45);
    assert_eq!(fit["manifest"]["command"], "verify-rate");
}

#[test]
fn manifest_replay_reproduces_outputs() {
    let sb = Sandbox::new();
    let cfg = sb.write("headline.toml", HEADLINE);
    assert_eq!(sb.run("verify-rate", &cfg, "first", &[]), 0);
    let manifest = sb.path("first").join("manifest.json");
    assert_eq!(sb.run("verify-rate", &manifest, "second", &[]), 0);
    for f in ["error_table.csv", "rate_fit.json"] {
        assert_eq!(sb.read("first", f), sb.read("second", f));
    }
}

#[test]
fn synthetic_without_decay_fails_the_gate() {
    let sb = Sandbox::new();
    let text = r#"
[experiment]
d = 1
n_list = [4, 8, 16, 32]
t = 0.1
engine = "synthetic"

[[rho0]]
k = [0]
amplitude = 0.4

[observable]
kind = "smooth"
link = { name = "cos", freq = 1.0 }
phis = [[{ k = [1], amplitude = 1.0 }]]

[synthetic]
exponent = 0.0
scale = 0.01
"#;
    let cfg = sb.write("syn.toml", text);
    assert_eq!(sb.run("verify-rate", &cfg, "flat", &[]), 1);
    let decaying = sb.write(
        "decay.toml",
        &text.replace("exponent = 0.0", "exponent = 1.0"),
    );
    assert_eq!(sb.run("verify-rate", &decaying, "decay", &[]), 0);
}

#[test]
fn noise_dominated_monte_carlo_reports_insufficient_replicas() {
    let sb = Sandbox::new();
    let cfg = sb.write(
        "mc.toml",
        &constant_profile(1, 0.5, "[2, 4, 8]", 0.05, "replicas = 20"),
    );
    assert_eq!(sb.run("verify-rate", &cfg, "out", &[]), 3);
    let fit: serde_json::Value = serde_json::from_str(&sb.read("out", "rate_fit.json")).unwrap();
    assert!(fit["message"]
        .as_str()
        .unwrap()
        .starts_with("insufficient replicas"));
}

#[test]
fn berry_esseen_rejects_positive_time() {
    let sb = Sandbox::new();
    let cfg = sb.write("be.toml", HEADLINE);
    assert_eq!(sb.run("berry-esseen", &cfg, "out", &[]), 2);
}

#[test]
fn covariance_at_constant_density_is_diagonal() {
    let sb = Sandbox::new();
    let (c, t) = (0.5, 0.1);
    let cfg = sb.write("cov.toml", &constant_profile(1, c, "[3]", t, ""));
    assert_eq!(sb.run("covariance", &cfg, "out", &[]), 0);
    let csv = sb.read("out", "covariance.csv");
    assert_eq!(comment(&csv, "radius"), "3");
    let lines = data_lines(&csv);
    let labels: Vec<&str> = lines[0].split(',').skip(1).collect();
    assert_eq!(labels.len(), 7);
    for (i, line) in lines[1..].iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let k: f64 = match cells[0].get(..4) {
            Some("cos(" | "sin(") => cells[0][4..].trim_end_matches(')').parse().unwrap(),
            _ => 0.0,
        };
        for (j, cell) in cells[1..].iter().enumerate() {
            let v: f64 = cell.parse().unwrap();
            let want = if i == j {
                c * (1.0 - c) * (1.0 - (-4.0 * std::f64::consts::PI.powi(2) * k * k * t).exp())
            } else {
                0.0
            };
            assert!(
                (v - want).abs() < 1e-13,
                "{} {}: {v} vs {want}",
                cells[0],
                labels[j]
            );
        }
    }
}

#[test]
fn diagnostics_pass_at_equilibrium() {
    let sb = Sandbox::new();
    let cfg = sb.write(
        "eq.toml",
        &constant_profile(1, 0.3, "[4, 8, 16]", 0.1, "engine = \"exact_two_point\""),
    );
    assert_eq!(sb.run("diagnostics", &cfg, "out", &[]), 0);
    let report: serde_json::Value =
        serde_json::from_str(&sb.read("out", "diagnostics.json")).unwrap();
    assert_eq!(report["all_passed"], true);
}

#[test]
fn config_hash_ignores_key_order() {
    let sb = Sandbox::new();
    let a = sb.write(
        "a.toml",
        &constant_profile(1, 0.5, "[1]", 0.0, "master_seed = 3"),
    );
    let reordered = r#"
[observable]
phi = [{ amplitude = 1.0, k = [1] }]
kind = "linear"

[[rho0]]
amplitude = 0.5
k = [0]

[experiment]
master_seed = 3
t = 0.0
n_list = [1]
d = 1
"#;
    let b = sb.write("b.toml", reordered);
    assert_eq!(sb.run("simulate", &a, "a", &[]), 0);
    assert_eq!(sb.run("simulate", &b, "b", &[]), 0);
    let ha = comment(&sb.read("a", "simulate_n1.csv"), "config_sha256");
    let hb = comment(&sb.read("b", "simulate_n1.csv"), "config_sha256");
    assert_eq!(ha, hb);
    assert_eq!(ha.len(), 64);
}
