//! `ssepclt`: reproducible runs of the exclusion-process fluctuation experiments.
//!
//! Exit codes: 0 pass, 1 criterion failed, 2 configuration error,
//! 3 precondition or noise gate not met.

mod config;
mod manifest;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use manifest::{CriterionOutcome, Header, RunManifest};
use serde::Serialize;
use ssepclt_core::harness::{
    berry_esseen_table, diagnostics_suite, error_curve, fit_rate_gated, initial_profile,
    replica_rng, set_worker_threads, ErrorTable, Execution, RateFit,
};
use ssepclt_core::ou::{covariance_v, write_covariance_csv};
use ssepclt_core::ssep::{fluctuation_field, mean_field, sample_initial, SimClock};
use ssepclt_core::Error;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ssepclt",
    version,
    about = "Exclusion-process fluctuation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory per lattice size and write occupancy snapshots.
    Simulate(Common),
    /// Particle-vs-Gaussian error curve and power-law fit.
    VerifyRate(Common),
    /// Initial-time error curve from the exact product law.
    BerryEsseen(Common),
    /// Lemma-level and oracle diagnostics.
    Diagnostics(Common),
    /// Export the noise covariance of the limit field.
    Covariance(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment file (TOML) or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for replica loops.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, env = "SSEPCLT_OUT_DIR", default_value = "ssepclt-out")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass = 0,
    Fail = 1,
    ConfigError = 2,
    Precondition = 3,
}

struct Failure {
    status: Status,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            status: Status::ConfigError,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::StateSpaceTooLarge { .. }
            | Error::NoiseDominated(_)
            | Error::InsufficientRows(_)
            | Error::UnsupportedObservable(_)
            | Error::NoClosedForm(_)
            | Error::IndefiniteCovariance { .. } => Status::Precondition,
            _ => Status::ConfigError,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            status: Status::Precondition,
            message: format!("i/o: {e}"),
        }
    }
}

type Outcome = Result<Status, Failure>;

struct Run {
    config: RunConfig,
    header: Header,
    out_dir: PathBuf,
    outputs: Vec<String>,
    criteria: Vec<CriterionOutcome>,
}

impl Run {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>, Failure> {
        self.outputs.push(name.into());
        Ok(BufWriter::new(File::create(self.out_dir.join(name))?))
    }

    fn write_json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), Failure> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            manifest: &'a Header,
            #[serde(flatten)]
            body: &'a T,
        }
        let header = self.header.clone();
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(
            &mut w,
            &Wrapped {
                manifest: &header,
                body,
            },
        )
        .map_err(|e| Failure {
            status: Status::Precondition,
            message: e.to_string(),
        })?;
        writeln!(w)?;
        Ok(())
    }

    fn write_table(&mut self, name: &str, table: &ErrorTable) -> Result<(), Failure> {
        let header = self.header.clone();
        let mut w = self.create(name)?;
        header.write_comment(&mut w)?;
        table.write_csv(&mut w)?;
        Ok(())
    }

    fn finish(self) -> Result<(), Failure> {
        let mut m = RunManifest::new(&self.header, &self.config);
        m.outputs = self.outputs.clone();
        m.criteria = self.criteria.clone();
        let mut w = BufWriter::new(File::create(self.out_dir.join("manifest.json"))?);
        serde_json::to_writer_pretty(&mut w, &m).map_err(|e| Failure {
            status: Status::Precondition,
            message: e.to_string(),
        })?;
        writeln!(w)?;
        Ok(())
    }
}

fn prepare(command: &str, args: &Common) -> Result<Run, Failure> {
    let mut config = config::load(&args.config).map_err(Failure::config)?;
    if let Some(seed) = args.seed {
        config.experiment.master_seed = seed;
    }
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(Failure::config("--threads must be at least 1"));
        }
        set_worker_threads(threads)?;
    }
    std::fs::create_dir_all(&args.out_dir)?;
    let header = Header::new(command, &config);
    Ok(Run {
        config,
        header,
        out_dir: args.out_dir.clone(),
        outputs: Vec::new(),
        criteria: Vec::new(),
    })
}

fn simulate(run: &mut Run) -> Outcome {
    let exp = run.config.experiment.clone();
    let rho0 = exp.profile()?;
    let snapshots = if exp.t > 0.0 { run.config.snapshots } else { 0 };
    for &n in &exp.n_list {
        let rho0_n = initial_profile(&rho0, n)?;
        let mut clock = SimClock::new(replica_rng(exp.master_seed, n, 0));
        let mut eta = sample_initial(&rho0_n, clock.rng())?;
        let header = run.header.clone();
        let mut w = run.create(&format!("simulate_n{n}.csv"))?;
        header.write_comment(&mut w)?;
        writeln!(w, "time,site,occupancy,rho,zeta")?;
        for i in 0..=snapshots {
            let time = if snapshots == 0 {
                0.0
            } else {
                exp.t * i as f64 / snapshots as f64
            };
            clock.advance(&mut eta, time)?;
            let rho_t = mean_field(&rho0_n, time)?;
            let zeta = fluctuation_field(&eta, &rho_t)?;
            for x in 0..rho_t.lattice().sites() {
                writeln!(
                    w,
                    "{time:.16e},{x},{},{:.16e},{:.16e}",
                    u8::from(eta.get(x)),
                    rho_t.values()[x],
                    zeta.values()[x]
                )?;
            }
        }
    }
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct FitReport {
    fit: Option<RateFit>,
    slope_gate: f64,
    passed: bool,
    message: String,
}

fn gate_fit(run: &mut Run, name: &str, file: &str, table: &ErrorTable) -> Outcome {
    let gate = run.config.experiment.slope_threshold();
    let (report, status) = match fit_rate_gated(table) {
        Ok(fit) => {
            let passed = fit.slope <= gate;
            let message = format!(
                "slope {:.6} over {} of {} rows, gate {gate}",
                fit.slope,
                fit.rows_used,
                table.rows.len()
            );
            (
                FitReport {
                    fit: Some(fit),
                    slope_gate: gate,
                    passed,
                    message,
                },
                if passed { Status::Pass } else { Status::Fail },
            )
        }
        Err(e @ (Error::NoiseDominated(_) | Error::InsufficientRows(_))) => (
            FitReport {
                fit: None,
                slope_gate: gate,
                passed: false,
                message: format!("insufficient replicas: {e}"),
            },
            Status::Precondition,
        ),
        Err(e) => return Err(e.into()),
    };
    eprintln!("{name}: {}", report.message);
    run.criteria.push(CriterionOutcome {
        name: name.into(),
        passed: report.passed,
    });
    run.write_json(file, &report)?;
    Ok(status)
}

fn verify_rate(run: &mut Run) -> Outcome {
    let table = error_curve(&run.config.experiment, Execution::default())?;
    run.write_table("error_table.csv", &table)?;
    gate_fit(run, "rate_fit", "rate_fit.json", &table)
}

fn berry_esseen(run: &mut Run) -> Outcome {
    if run.config.experiment.t != 0.0 {
        return Err(Failure::config("berry-esseen needs t = 0"));
    }
    let table = berry_esseen_table(&run.config.experiment, Execution::default())?;
    run.write_table("berry_esseen.csv", &table)?;
    gate_fit(run, "berry_esseen_fit", "berry_esseen_fit.json", &table)
}

fn diagnostics(run: &mut Run) -> Outcome {
    let report = diagnostics_suite(&run.config.experiment)?;
    for r in &report.results {
        eprintln!(
            "{:<24} {}",
            r.name,
            if r.skipped {
                "skipped"
            } else if r.passed {
                "pass"
            } else {
                "FAIL"
            }
        );
        run.criteria.push(CriterionOutcome {
            name: r.name.clone(),
            passed: r.passed,
        });
    }
    run.write_json("diagnostics.json", &report)?;
    Ok(if report.all_passed {
        Status::Pass
    } else {
        Status::Fail
    })
}

fn covariance(run: &mut Run) -> Outcome {
    let exp = run.config.experiment.clone();
    let radius = exp.radius_for(*exp.n_list.last().expect("validated"));
    let v = covariance_v(&exp.profile()?, exp.t, radius, exp.noise_prefactor)?;
    let header = run.header.clone();
    let mut w = run.create("covariance.csv")?;
    header.write_comment(&mut w)?;
    writeln!(w, "# t: {:.16e}", exp.t)?;
    writeln!(w, "# radius: {radius}")?;
    write_covariance_csv(v.basis(), v.matrix(), &mut w)?;
    Ok(Status::Pass)
}

fn dispatch(name: &str, args: &Common, body: fn(&mut Run) -> Outcome) -> Outcome {
    let mut run = prepare(name, args)?;
    let status = body(&mut run)?;
    run.finish()?;
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => dispatch("simulate", a, simulate),
        Command::VerifyRate(a) => dispatch("verify-rate", a, verify_rate),
        Command::BerryEsseen(a) => dispatch("berry-esseen", a, berry_esseen),
        Command::Diagnostics(a) => dispatch("diagnostics", a, diagnostics),
        Command::Covariance(a) => dispatch("covariance", a, covariance),
    };
    let status = match result {
        Ok(s) => s,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.status
        }
    };
    ExitCode::from(status as u8)
}
