use super::config::{Engine, ExperimentConfig, Zeta0Mode};
use crate::error::{Error, Result};
use crate::observables::{Link, Observable};
use crate::ou::{initial_covariance, law_at_time, BandLimitedProfile, GaussianLaw};
use crate::ssep::{
    exact_master_distribution, exact_two_point, fluctuation_field, mean_field, sample_initial,
    Configuration, SimClock, MASTER_SITE_LIMIT,
};
use crate::torus::{project, GridField, Lattice, SpectralField};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Sites above which [`exact_initial_expectation`] refuses to run.
pub const EXACT_INITIAL_SITE_LIMIT: usize = 22;

/// How replicas are scheduled. Results are identical in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Self::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Self::Sequential
        }
    }
}

impl Execution {
    /// `f(0), …, f(count−1)` in index order.
    pub fn map<T, F>(self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Self::Sequential => (0..count).map(f).collect(),
            #[cfg(feature = "parallel")]
            Self::Parallel => {
                use rayon::prelude::*;
                (0..count).into_par_iter().map(f).collect()
            }
        }
    }
}

/// Sets the worker count of the global replica pool. Must be called before
/// any parallel work; a no-op without the `parallel` feature.
pub fn set_worker_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}

/// A value with its standard error (0 for exact engines).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    /// Sample mean and standard error, summed in order with compensation.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least 2 replicas for a standard error".into(),
            ));
        }
        let n = samples.len() as f64;
        let mean = kahan_sum(samples.iter().copied()) / n;
        let ss = kahan_sum(samples.iter().map(|v| (v - mean) * (v - mean)));
        Ok(Self {
            value: mean,
            stderr: (ss / (n - 1.0) / n).sqrt(),
        })
    }
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// SplitMix64 finaliser; decorrelates seeds derived from small integers.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut z = master ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GAUSSIAN_TAG: u64 = 1 << 40;

/// Random stream of one replica: seed from `(master, n)`, stream = replica index.
pub fn replica_rng(master: u64, n: usize, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master, n as u64));
    rng.set_stream(replica as u64);
    rng
}

fn gaussian_rng(master: u64, n: usize, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master, GAUSSIAN_TAG | n as u64));
    rng.set_stream(replica as u64);
    rng
}

/// `ρ_0^n` on `T_n^d`.
pub fn initial_profile(rho0: &BandLimitedProfile, n: usize) -> Result<GridField> {
    rho0.restrict(Lattice::new(n, rho0.d())?)
}

/// One particle replica: `F(ζ_t^n)` started from the product law.
pub fn particle_replica(
    rho0_n: &GridField,
    rho_t: &GridField,
    t: f64,
    eval: &impl Fn(&GridField) -> Result<f64>,
    rng: ChaCha8Rng,
) -> Result<f64> {
    let mut clock = SimClock::new(rng);
    let mut eta = sample_initial(rho0_n, clock.rng())?;
    clock.advance(&mut eta, t)?;
    eval(&fluctuation_field(&eta, rho_t)?)
}

/// Monte Carlo estimate of `E F(ζ_t^n)` over `cfg.replicas` independent runs.
pub fn monte_carlo_expectation(
    cfg: &ExperimentConfig,
    n: usize,
    exec: Execution,
) -> Result<Estimate> {
    let rho0 = cfg.profile()?;
    let rho0_n = initial_profile(&rho0, n)?;
    let rho_t = mean_field(&rho0_n, cfg.t)?;
    let obs = cfg.build_observable()?.on_lattice(rho0_n.lattice())?;
    let eval = |z: &GridField| obs.eval(z);
    let values = exec.map(cfg.replicas, |r| {
        particle_replica(
            &rho0_n,
            &rho_t,
            cfg.t,
            &eval,
            replica_rng(cfg.master_seed, n, r),
        )
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    Estimate::from_samples(&values)
}

/// Gaussian law of the limit field with mode radius `K` for lattice size `n`.
pub fn gaussian_law(cfg: &ExperimentConfig, n: usize) -> Result<GaussianLaw> {
    let rho0 = cfg.profile()?;
    let radius = cfg.radius_for(n);
    let initial = match cfg.zeta0 {
        Zeta0Mode::MatchedGaussian => initial_covariance(&rho0, radius)?,
        Zeta0Mode::Deterministic => {
            let m = crate::torus::RealBasis::new(cfg.d, radius)?.len();
            GaussianLaw::new(
                cfg.d,
                radius,
                DVector::zeros(m),
                DMatrix::zeros(m, m),
                cfg.noise_prefactor,
            )?
        }
    };
    law_at_time(&rho0, &initial, cfg.t, cfg.noise_prefactor)
}

/// `E F(ζ_t)` under the limit law, in closed form when available and by
/// Monte Carlo with `gaussian_replica_factor × replicas` draws otherwise.
pub fn gaussian_expectation(cfg: &ExperimentConfig, n: usize, exec: Execution) -> Result<Estimate> {
    let law = gaussian_law(cfg, n)?;
    let obs = cfg.build_observable()?;
    match obs.gaussian_expectation_closed_form(&law) {
        Ok(v) => Ok(Estimate::exact(v)),
        Err(Error::NoClosedForm(_)) => {
            let sampler = law.sampler()?;
            let coord = obs.on_basis(law.basis())?;
            let draws = cfg.replicas * cfg.gaussian_replica_factor;
            let values = exec.map(draws, |r| {
                let mut rng = gaussian_rng(cfg.master_seed, n, r);
                coord.eval(&sampler.sample_coords(&mut rng))
            });
            Estimate::from_samples(&values)
        }
        Err(e) => Err(e),
    }
}

/// `(c, Σ w_ij X_i X_j)`: the observable as a constant plus a quadratic form
/// in its pairings, when it has no odd-degree part beyond degree 1.
fn as_second_order(obs: &Observable) -> Option<(f64, Vec<(f64, usize, usize)>, Vec<(f64, usize)>)> {
    match obs {
        Observable::Linear(_) => Some((0.0, vec![], vec![(1.0, 0)])),
        Observable::Quadratic(q) => Some((
            0.0,
            q.terms
                .iter()
                .enumerate()
                .map(|(r, (w, _))| (*w, r, r))
                .collect(),
            vec![],
        )),
        Observable::Smooth {
            link: Link::Polynomial { coeffs },
            ..
        } if coeffs.len() <= 3 => {
            let c = |i: usize| coeffs.get(i).copied().unwrap_or(0.0);
            Some((c(0), vec![(c(2), 0, 0)], vec![(c(1), 0)]))
        }
        Observable::Smooth {
            link: Link::Monomial { powers },
            ..
        } => {
            let idx: Vec<usize> = powers
                .iter()
                .enumerate()
                .flat_map(|(i, &p)| std::iter::repeat_n(i, p as usize))
                .collect();
            match idx.as_slice() {
                [] => Some((1.0, vec![], vec![])),
                [i] => Some((0.0, vec![], vec![(1.0, *i)])),
                [i, j] => Some((0.0, vec![(1.0, *i, *j)], vec![])),
                _ => None,
            }
        }
        _ => None,
    }
}

fn pairings(obs: &Observable) -> Vec<&SpectralField> {
    match obs {
        Observable::Linear(p) => vec![p],
        Observable::Smooth { phis, .. } => phis.iter().collect(),
        Observable::Quadratic(q) => q.terms.iter().map(|(_, p)| p).collect(),
    }
}

/// Exact `E F(ζ_t^n)` for observables of degree at most two, from the
/// two-point correlation ODE. The fluctuation field has mean zero, so linear
/// parts drop out.
pub fn exact_expectation_second_moment(cfg: &ExperimentConfig, n: usize) -> Result<Estimate> {
    let obs = cfg.build_observable()?;
    let (c, quad, _) = as_second_order(&obs).ok_or_else(|| {
        Error::UnsupportedObservable(
            "the two-point engine needs an observable of degree at most 2".into(),
        )
    })?;
    let rho0_n = initial_profile(&cfg.profile()?, n)?;
    let table = exact_two_point(&rho0_n, cfg.t)?;
    let grids: Vec<GridField> = pairings(&obs)
        .into_iter()
        .map(|p| project(p, rho0_n.lattice()))
        .collect::<Result<_>>()?;
    let mut total = c;
    for (w, i, j) in quad {
        total += w * table.second_moment(&grids[i], &grids[j])?;
    }
    Ok(Estimate::exact(total))
}

/// Exact `E F(⟨pr_n φ, ζ_0^n⟩_n)` under the product Bernoulli law, for a
/// single-pairing observable. The pairing is a sum of independent two-point
/// variables; its law is built by convolving the atoms site by site.
pub fn exact_initial_expectation(obs: &Observable, rho0_n: &GridField) -> Result<f64> {
    let lat = rho0_n.lattice();
    if lat.sites() > EXACT_INITIAL_SITE_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            sites: lat.sites(),
            limit: EXACT_INITIAL_SITE_LIMIT,
        });
    }
    let phis = pairings(obs);
    if phis.len() != 1 {
        return Err(Error::UnsupportedObservable(
            "exact initial law needs a single pairing".into(),
        ));
    }
    let g = project(phis[0], lat)?;
    let sites = lat.sites() as f64;
    let scale = sites.sqrt() / sites;
    // atoms of X = Σ_x scale·g(x)(η(x) − ρ(x))
    let mut atoms: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    for (&gx, &r) in g.values().iter().zip(rho0_n.values()) {
        let mut next = Vec::with_capacity(atoms.len() * 2);
        for &(v, p) in &atoms {
            next.push((v + scale * gx * (1.0 - r), p * r));
            next.push((v - scale * gx * r, p * (1.0 - r)));
        }
        next.retain(|(_, p)| *p > 0.0);
        next.sort_by(|a, b| a.0.total_cmp(&b.0));
        atoms = merge_atoms(next);
    }
    let f = |x: f64| match obs {
        Observable::Linear(_) => x,
        Observable::Smooth { link, .. } => link.eval(&[x]),
        Observable::Quadratic(q) => q.terms[0].0 * x * x,
    };
    Ok(atoms.iter().map(|&(v, p)| p * f(v)).sum())
}

fn merge_atoms(sorted: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for (v, p) in sorted {
        match out.last_mut() {
            Some((lv, lp)) if (v - *lv).abs() <= 1e-13 * (1.0 + v.abs()) => *lp += p,
            _ => out.push((v, p)),
        }
    }
    out
}

/// Exact `E F(ζ_t^n)` by enumerating every configuration. At `t = 0` with a
/// single pairing the product law is convolved directly; otherwise the
/// master equation is solved, which caps the lattice at
/// [`MASTER_SITE_LIMIT`] sites.
pub fn exact_enumeration_expectation(cfg: &ExperimentConfig, n: usize) -> Result<Estimate> {
    let obs = cfg.build_observable()?;
    let rho0_n = initial_profile(&cfg.profile()?, n)?;
    if cfg.t == 0.0 && pairings(&obs).len() == 1 {
        if let Ok(v) = exact_initial_expectation(&obs, &rho0_n) {
            return Ok(Estimate::exact(v));
        }
    }
    let lat = rho0_n.lattice();
    if lat.sites() > MASTER_SITE_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            sites: lat.sites(),
            limit: MASTER_SITE_LIMIT,
        });
    }
    let dist = exact_master_distribution(&rho0_n, cfg.t)?;
    let rho_t = mean_field(&rho0_n, cfg.t)?;
    let eval = obs.on_lattice(lat)?;
    let mut total = 0.0;
    for (s, &p) in dist.probabilities().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let eta = Configuration::from_mask(lat, s as u64)?;
        total += p * eval.eval(&fluctuation_field(&eta, &rho_t)?)?;
    }
    Ok(Estimate::exact(total))
}

/// Particle-side estimate for the configured engine.
pub fn particle_expectation(cfg: &ExperimentConfig, n: usize, exec: Execution) -> Result<Estimate> {
    match cfg.engine {
        Engine::MonteCarlo => monte_carlo_expectation(cfg, n, exec),
        Engine::ExactTwoPoint => exact_expectation_second_moment(cfg, n),
        Engine::ExactEnumeration => exact_enumeration_expectation(cfg, n),
        Engine::Synthetic => {
            let spec = cfg
                .synthetic
                .ok_or_else(|| Error::InvalidArgument("missing synthetic spec".into()))?;
            let g = gaussian_expectation(cfg, n, exec)?;
            Ok(Estimate::exact(
                g.value + spec.scale * (n as f64).powf(-spec.exponent),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ModeIndex;

    #[test]
    fn kahan_and_stderr() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.value, 2.5);
        assert!((e.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(Estimate::from_samples(&[1.0]).is_err());
    }

    #[test]
    fn seeds_differ_per_n() {
        assert_ne!(derive_seed(7, 4), derive_seed(7, 8));
        assert_eq!(derive_seed(7, 4), derive_seed(7, 4));
    }

    #[test]
    fn exact_initial_variance_matches_formula() {
        let rho = BandLimitedProfile::from_terms(
            1,
            &[
                (ModeIndex::from(0), 0.5, 0.0),
                (ModeIndex::from(1), 0.3, 0.0),
            ],
        )
        .unwrap();
        let rho_n = initial_profile(&rho, 3).unwrap();
        let phi =
            SpectralField::cosine(1, &ModeIndex::from(1), std::f64::consts::SQRT_2, 0.0).unwrap();
        let obs = Observable::Quadratic(crate::observables::BilinearFormSpec {
            terms: vec![(1.0, phi.clone())],
        });
        let got = exact_initial_expectation(&obs, &rho_n).unwrap();
        let g = project(&phi, rho_n.lattice()).unwrap();
        let want: f64 = g
            .values()
            .iter()
            .zip(rho_n.values())
            .map(|(a, r)| a * a * r * (1.0 - r))
            .sum::<f64>()
            / 7.0;
        assert!((got - want).abs() < 1e-14);
    }
}
