use crate::config::RunConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of the configuration as compact JSON with sorted keys, so that
/// reordering keys in the source file leaves it unchanged.
pub fn config_hash(run: &RunConfig) -> String {
    // serde_json's default map is ordered by key
    let value = serde_json::to_value(run).expect("config serializes");
    let digest = Sha256::digest(value.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Identifying fields shared by every output of one run. No wall-clock time,
/// so replaying a run reproduces every data file byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub master_seed: u64,
    pub noise_prefactor: String,
}

impl Header {
    pub fn new(command: &str, run: &RunConfig) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config_sha256: config_hash(run),
            master_seed: run.experiment.master_seed,
            noise_prefactor: run.experiment.noise_prefactor.label().into(),
        }
    }

    /// `# key: value` comment lines for CSV files.
    pub fn write_comment(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# tool: {} {}", self.tool, self.version)?;
        writeln!(w, "# command: {}", self.command)?;
        writeln!(w, "# config_sha256: {}", self.config_sha256)?;
        writeln!(w, "# master_seed: {}", self.master_seed)?;
        writeln!(w, "# noise_prefactor: {}", self.noise_prefactor)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub name: String,
    pub passed: bool,
}

/// `manifest.json`: the header, the full configuration, outputs and outcomes.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    #[serde(flatten)]
    pub header: &'a Header,
    pub wall_clock_unix: u64,
    pub outputs: Vec<String>,
    pub criteria: Vec<CriterionOutcome>,
    pub config: &'a RunConfig,
}

impl<'a> RunManifest<'a> {
    pub fn new(header: &'a Header, config: &'a RunConfig) -> Self {
        let wall_clock_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            header,
            wall_clock_unix,
            outputs: Vec::new(),
            criteria: Vec::new(),
            config,
        }
    }
}
