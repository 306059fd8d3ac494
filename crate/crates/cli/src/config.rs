//! Experiment file grammar.
//!
//! ```toml
//! [experiment]
//! d = 1
//! n_list = [4, 8, 16, 32]
//! t = 0.1
//! engine = "exact_two_point"      # monte_carlo | exact_two_point | exact_enumeration | synthetic
//!
//! [[rho0]]
//! k = [0]
//! amplitude = 0.5
//!
//! [[rho0]]
//! k = [1]
//! amplitude = 0.3
//!
//! [observable]
//! kind = "quadratic"
//! terms = [{ weight = 1.0, phi = [{ k = [1], amplitude = 1.4142135623730951 }] }]
//! ```
//!
//! A `manifest.json` written by an earlier run is accepted in place of a
//! TOML file and replays the exact configuration it records.

use serde::{Deserialize, Serialize};
use ssepclt_core::harness::{
    Engine, ExperimentConfig, ModeTerm, ObservableSpec, SyntheticSpec, Zeta0Mode,
};
use ssepclt_core::ou::NoisePrefactor;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: ExperimentSection,
    rho0: Vec<ModeTerm>,
    observable: ObservableSpec,
    synthetic: Option<SyntheticSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    d: usize,
    n_list: Vec<usize>,
    t: f64,
    #[serde(default)]
    zeta0: Zeta0Mode,
    #[serde(default = "default_replicas")]
    replicas: usize,
    #[serde(default)]
    master_seed: u64,
    #[serde(default)]
    noise_prefactor: NoisePrefactor,
    truncation: Option<usize>,
    #[serde(default)]
    engine: Engine,
    #[serde(default = "default_gaussian_factor")]
    gaussian_replica_factor: usize,
    slope_gate: Option<f64>,
    #[serde(default = "default_snapshots")]
    snapshots: usize,
}

fn default_replicas() -> usize {
    1000
}

fn default_gaussian_factor() -> usize {
    10
}

fn default_snapshots() -> usize {
    1
}

/// A loaded experiment plus driver-only settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    /// Equally spaced snapshot intervals written by `simulate`.
    pub snapshots: usize,
}

#[derive(Debug, Deserialize)]
struct ManifestConfig {
    config: RunConfig,
}

pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let run = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str::<ManifestConfig>(&text)
            .map_err(|e| format!("{}: {e}", path.display()))?
            .config
    } else {
        parse_toml(&text).map_err(|e| format!("{}: {e}", path.display()))?
    };
    run.experiment
        .validate()
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(run)
}

pub fn parse_toml(text: &str) -> Result<RunConfig, String> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| e.to_string())?;
    let e = file.experiment;
    Ok(RunConfig {
        experiment: ExperimentConfig {
            d: e.d,
            n_list: e.n_list,
            t: e.t,
            rho0: file.rho0,
            observable: file.observable,
            zeta0: e.zeta0,
            replicas: e.replicas,
            master_seed: e.master_seed,
            noise_prefactor: e.noise_prefactor,
            truncation: e.truncation,
            engine: e.engine,
            gaussian_replica_factor: e.gaussian_replica_factor,
            slope_gate: e.slope_gate,
            synthetic: file.synthetic,
        },
        snapshots: e.snapshots.max(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [experiment]
        d = 1
        n_list = [1]
        t = 0.0

        [[rho0]]
        k = [0]
        amplitude = 0.5

        [observable]
        kind = "linear"
        phi = [{ k = [1], amplitude = 1.0 }]
    "#;

    #[test]
    fn minimal_parses_with_defaults() {
        let run = parse_toml(MINIMAL).unwrap();
        assert_eq!(run.experiment.replicas, 1000);
        assert_eq!(run.experiment.engine, Engine::MonteCarlo);
        assert_eq!(run.snapshots, 1);
        run.experiment.validate().unwrap();
    }

    #[test]
    fn unknown_key_reports_name() {
        let err = parse_toml(&MINIMAL.replace("t = 0.0", "t = 0.0\nbogus = 3")).unwrap_err();
        assert!(err.contains("bogus"), "{err}");
    }
}
