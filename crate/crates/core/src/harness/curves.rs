use super::config::{Engine, ExperimentConfig, Zeta0Mode};
use super::engines::{
    exact_initial_expectation, gaussian_expectation, initial_profile, particle_expectation,
    Estimate, Execution,
};
use crate::error::{Error, Result};
use crate::observables::Observable;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::io::Write;

/// One lattice size of an error curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub n: usize,
    pub particle_value: f64,
    pub particle_stderr: f64,
    pub gaussian_value: f64,
    pub gaussian_stderr: f64,
    pub abs_error: f64,
    /// `‖φ − P_K φ‖_{L²}` summed over the test functions; zero when every φ
    /// fits inside the Gaussian mode box.
    pub truncation_tail: f64,
}

impl ErrorRow {
    pub fn new(n: usize, particle: Estimate, gaussian: Estimate, truncation_tail: f64) -> Self {
        Self {
            n,
            particle_value: particle.value,
            particle_stderr: particle.stderr,
            gaussian_value: gaussian.value,
            gaussian_stderr: gaussian.stderr,
            abs_error: (particle.value - gaussian.value).abs(),
            truncation_tail,
        }
    }

    /// Combined Monte Carlo error of the difference.
    pub fn stderr(&self) -> f64 {
        self.particle_stderr.hypot(self.gaussian_stderr)
    }
}

/// `|E F(particle) − E F(Gaussian)|` over a ladder of lattice sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub t: f64,
    pub observable: String,
    pub engine: String,
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub const CSV_HEADER: &'static str =
        "n,t,observable,engine,particle_value,particle_stderr,gaussian_value,abs_error,gaussian_stderr,truncation_tail";

    /// Data rows with floats at 17 significant digits; no header.
    pub fn write_csv_rows(&self, mut w: impl Write) -> std::io::Result<()> {
        for r in &self.rows {
            writeln!(
                w,
                "{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.n,
                self.t,
                self.observable,
                self.engine,
                r.particle_value,
                r.particle_stderr,
                r.gaussian_value,
                r.abs_error,
                r.gaussian_stderr,
                r.truncation_tail
            )?;
        }
        Ok(())
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        self.write_csv_rows(w)
    }
}

fn truncation_tail(obs: &Observable, radius: usize) -> f64 {
    let phis: Vec<_> = match obs {
        Observable::Linear(p) => vec![p],
        Observable::Smooth { phis, .. } => phis.iter().collect(),
        Observable::Quadratic(q) => q.terms.iter().map(|(_, p)| p).collect(),
    };
    phis.iter()
        .map(|p| {
            p.modes()
                .iter()
                .zip(p.coeffs())
                .filter(|(k, _)| k.max_abs() as usize > radius)
                .map(|(_, c)| c.norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .sum()
}

/// Particle and Gaussian expectations for every `n` in the ladder.
pub fn error_curve(cfg: &ExperimentConfig, exec: Execution) -> Result<ErrorTable> {
    cfg.validate()?;
    let obs = cfg.build_observable()?;
    let rows = cfg
        .n_list
        .iter()
        .map(|&n| {
            let particle = particle_expectation(cfg, n, exec)?;
            let gaussian = gaussian_expectation(cfg, n, exec)?;
            Ok(ErrorRow::new(
                n,
                particle,
                gaussian,
                truncation_tail(&obs, cfg.radius_for(n)),
            ))
        })
        .collect::<Result<_>>()?;
    Ok(ErrorTable {
        t: cfg.t,
        observable: cfg.observable.label(),
        engine: cfg.engine.label().into(),
        rows,
    })
}

/// Initial-time comparison: the exact law of `f(⟨pr_n φ, ζ_0^n⟩_n)` against
/// the matched Gaussian.
pub fn berry_esseen_table(cfg: &ExperimentConfig, exec: Execution) -> Result<ErrorTable> {
    if cfg.t != 0.0 {
        return Err(Error::InvalidArgument(
            "the initial-time comparison needs t = 0".into(),
        ));
    }
    let mut cfg = cfg.clone();
    cfg.zeta0 = Zeta0Mode::MatchedGaussian;
    cfg.engine = Engine::ExactEnumeration;
    cfg.validate()?;
    let obs = cfg.build_observable()?;
    let rho0 = cfg.profile()?;
    let rows = cfg
        .n_list
        .iter()
        .map(|&n| {
            let particle = Estimate::exact(exact_initial_expectation(
                &obs,
                &initial_profile(&rho0, n)?,
            )?);
            let gaussian = gaussian_expectation(&cfg, n, exec)?;
            Ok(ErrorRow::new(
                n,
                particle,
                gaussian,
                truncation_tail(&obs, cfg.radius_for(n)),
            ))
        })
        .collect::<Result<_>>()?;
    Ok(ErrorTable {
        t: 0.0,
        observable: cfg.observable.label(),
        engine: cfg.engine.label().into(),
        rows,
    })
}

/// [`berry_esseen_table`] followed by a strict [`fit_rate`].
pub fn berry_esseen_curve(
    cfg: &ExperimentConfig,
    exec: Execution,
) -> Result<(ErrorTable, RateFit)> {
    let table = berry_esseen_table(cfg, exec)?;
    let fit = fit_rate(&table)?;
    Ok((table, fit))
}

/// Least-squares line through `(log n, log abs_error)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    /// 95% Student-t interval for the slope.
    pub slope_ci: (f64, f64),
    pub rows_used: usize,
}

/// Strict fit: every row must have `abs_error > 10 × stderr` and be positive.
pub fn fit_rate(table: &ErrorTable) -> Result<RateFit> {
    let noisy: Vec<String> = table
        .rows
        .iter()
        .filter(|r| !(r.abs_error > 0.0) || r.abs_error <= 10.0 * r.stderr())
        .map(|r| {
            format!(
                "n={} abs_error={:e} stderr={:e}",
                r.n,
                r.abs_error,
                r.stderr()
            )
        })
        .collect();
    if !noisy.is_empty() {
        return Err(Error::NoiseDominated(noisy.join("; ")));
    }
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .map(|r| (r.n as f64, r.abs_error))
        .collect();
    fit_power_law(&pts)
}

/// Fit on the rows that pass the noise rule, `stderr ≤ abs_error / 10`.
pub fn fit_rate_gated(table: &ErrorTable) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.abs_error > 0.0 && r.stderr() <= 0.1 * r.abs_error)
        .map(|r| (r.n as f64, r.abs_error))
        .collect();
    fit_power_law(&pts)
}

/// Ordinary least squares of `log y` on `log x`; at least 3 points.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<RateFit> {
    let k = points.len();
    if k < 3 {
        return Err(Error::InsufficientRows(k));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0)) {
        return Err(Error::InvalidArgument(
            "power-law fit needs positive values".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let kf = k as f64;
    let mx = xs.iter().sum::<f64>() / kf;
    let my = ys.iter().sum::<f64>() / kf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all n values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let dof = kf - 2.0;
    let slope_stderr = (sse / dof / sxx).sqrt();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let q = StudentsT::new(0.0, 1.0, dof)
        .expect("dof >= 1")
        .inverse_cdf(0.975);
    Ok(RateFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        slope_ci: (slope - q * slope_stderr, slope + q * slope_stderr),
        rows_used: k,
    })
}
