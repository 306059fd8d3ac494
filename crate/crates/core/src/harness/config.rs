use crate::error::{Error, Result};
use crate::observables::{BilinearFormSpec, Link, Observable};
use crate::ou::{BandLimitedProfile, NoisePrefactor};
use crate::torus::{ModeIndex, SpectralField};
use serde::{Deserialize, Serialize};

/// One term `amplitude · cos(k·x + phase)` of a trigonometric polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeTerm {
    pub k: Vec<i64>,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

impl ModeTerm {
    pub fn new(k: Vec<i64>, amplitude: f64, phase: f64) -> Self {
        Self {
            k,
            amplitude,
            phase,
        }
    }
}

pub(crate) fn field_from_terms(d: usize, terms: &[ModeTerm]) -> Result<SpectralField> {
    if terms.is_empty() {
        return Err(Error::InvalidArgument(
            "a test function needs at least one mode term".into(),
        ));
    }
    let mut radius = 0;
    for t in terms {
        if t.k.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "mode {:?} given for d={d}",
                t.k
            )));
        }
        radius = radius.max(
            t.k.iter()
                .map(|v| v.unsigned_abs() as usize)
                .max()
                .unwrap_or(0),
        );
    }
    let mut f = SpectralField::zeros(d, radius)?;
    for t in terms {
        f.add_cosine(&ModeIndex(t.k.clone()), t.amplitude, t.phase)?;
    }
    Ok(f)
}

/// Serializable observable description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    Linear {
        phi: Vec<ModeTerm>,
    },
    Smooth {
        link: Link,
        phis: Vec<Vec<ModeTerm>>,
    },
    Quadratic {
        terms: Vec<QuadraticTerm>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticTerm {
    pub weight: f64,
    pub phi: Vec<ModeTerm>,
}

impl ObservableSpec {
    pub fn build(&self, d: usize) -> Result<Observable> {
        match self {
            Self::Linear { phi } => Ok(Observable::Linear(field_from_terms(d, phi)?)),
            Self::Smooth { link, phis } => {
                let fields = phis
                    .iter()
                    .map(|p| field_from_terms(d, p))
                    .collect::<Result<_>>()?;
                Observable::smooth(link.clone(), fields)
            }
            Self::Quadratic { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidArgument(
                        "quadratic observable needs terms".into(),
                    ));
                }
                let terms = terms
                    .iter()
                    .map(|q| Ok((q.weight, field_from_terms(d, &q.phi)?)))
                    .collect::<Result<_>>()?;
                Ok(Observable::Quadratic(BilinearFormSpec { terms }))
            }
        }
    }

    /// Short identifier used in tables.
    pub fn label(&self) -> String {
        match self {
            Self::Linear { .. } => "linear".into(),
            Self::Smooth { link, phis } => {
                let name = match link {
                    Link::Polynomial { .. } => "polynomial",
                    Link::Monomial { .. } => "monomial",
                    Link::Cos { .. } => "cos",
                    Link::Sin { .. } => "sin",
                    Link::ExpClip { .. } => "exp_clip",
                };
                format!("smooth_{name}_m{}", phis.len())
            }
            Self::Quadratic { terms } => format!("quadratic_r{}", terms.len()),
        }
    }
}

/// Initial law of the Gaussian side.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zeta0Mode {
    /// `ζ_0 ~ N(0, A_{ρ_0})`, matching the particle initial fluctuations.
    #[default]
    MatchedGaussian,
    /// `ζ_0 = 0`.
    Deterministic,
}

/// How the particle-side expectation is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    MonteCarlo,
    /// Two-point correlation ODE; quadratic observables only.
    ExactTwoPoint,
    /// Exact convolution at `t = 0`, full master equation for `t > 0`.
    ExactEnumeration,
    /// Plumbing check: particle value = Gaussian value + `scale · n^{−exponent}`.
    Synthetic,
}

impl Engine {
    pub fn label(&self) -> &'static str {
        match self {
            Self::MonteCarlo => "monte_carlo",
            Self::ExactTwoPoint => "exact_two_point",
            Self::ExactEnumeration => "exact_enumeration",
            Self::Synthetic => "synthetic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub exponent: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

fn default_replicas() -> usize {
    1000
}

fn default_gaussian_factor() -> usize {
    10
}

/// Everything that defines one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub n_list: Vec<usize>,
    pub t: f64,
    pub rho0: Vec<ModeTerm>,
    pub observable: ObservableSpec,
    #[serde(default)]
    pub zeta0: Zeta0Mode,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub noise_prefactor: NoisePrefactor,
    /// Gaussian mode radius; `None` means `K = n`.
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub engine: Engine,
    /// Gaussian Monte Carlo replicas per particle replica (non-polynomial observables).
    #[serde(default = "default_gaussian_factor")]
    pub gaussian_replica_factor: usize,
    /// Required fitted slope; defaults to `−0.9 (d/2 ∧ 1)`.
    #[serde(default)]
    pub slope_gate: Option<f64>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.d) {
            return Err(Error::UnsupportedDimension(self.d));
        }
        if self.n_list.is_empty() {
            return Err(Error::InvalidArgument("n_list is empty".into()));
        }
        if self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "n_list must be positive and strictly increasing".into(),
            ));
        }
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::NegativeTime(self.t));
        }
        if self.replicas == 0 {
            return Err(Error::InvalidArgument("replicas must be >= 1".into()));
        }
        if self.gaussian_replica_factor < 10 {
            return Err(Error::InvalidArgument(
                "gaussian_replica_factor must be >= 10".into(),
            ));
        }
        if self.engine == Engine::Synthetic && self.synthetic.is_none() {
            return Err(Error::InvalidArgument(
                "synthetic engine needs a [synthetic] block".into(),
            ));
        }
        self.profile()?;
        self.build_observable()?;
        Ok(())
    }

    pub fn profile(&self) -> Result<BandLimitedProfile> {
        let terms: Vec<(ModeIndex, f64, f64)> = self
            .rho0
            .iter()
            .map(|t| {
                if t.k.len() != self.d {
                    return Err(Error::DimensionMismatch(format!(
                        "rho0 mode {:?} for d={}",
                        t.k, self.d
                    )));
                }
                Ok((ModeIndex(t.k.clone()), t.amplitude, t.phase))
            })
            .collect::<Result<_>>()?;
        BandLimitedProfile::from_terms(self.d, &terms)
    }

    pub fn build_observable(&self) -> Result<Observable> {
        self.observable.build(self.d)
    }

    pub fn radius_for(&self, n: usize) -> usize {
        self.truncation.unwrap_or(n)
    }

    pub fn slope_threshold(&self) -> f64 {
        self.slope_gate
            .unwrap_or(-0.9 * (self.d as f64 / 2.0).min(1.0))
    }
}
