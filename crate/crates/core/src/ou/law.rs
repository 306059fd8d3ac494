use super::covariance::{covariance_v, initial_covariance_form};
use super::profile::{BandLimitedProfile, NoisePrefactor};
use crate::error::{Error, Result};
use crate::torus::{heat_propagate_continuous, RealBasis, SpectralField, TWO_PI_SQ};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use std::io::Write;

/// Eigenvalues in `[−EIGEN_FLOOR, 0)` are treated as roundoff and clamped.
pub const EIGEN_FLOOR: f64 = 1e-10;

/// Gaussian law over the real mode basis of radius `K`.
#[derive(Debug, Clone)]
pub struct GaussianLaw {
    basis: RealBasis,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    noise: NoisePrefactor,
}

impl GaussianLaw {
    pub fn new(
        d: usize,
        radius: usize,
        mean: DVector<f64>,
        cov: DMatrix<f64>,
        noise: NoisePrefactor,
    ) -> Result<Self> {
        let basis = RealBasis::new(d, radius)?;
        let m = basis.len();
        if mean.len() != m || cov.nrows() != m || cov.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "law over {m} modes needs a {m}-vector and {m}x{m} matrix"
            )));
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > 1e-10 * cov.amax().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "covariance is not symmetric (gap {asym:e})"
            )));
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self {
            basis,
            mean,
            cov,
            noise,
        })
    }

    pub fn basis(&self) -> &RealBasis {
        &self.basis
    }

    pub fn d(&self) -> usize {
        self.basis.modes().d()
    }

    pub fn radius(&self) -> usize {
        self.basis.modes().radius()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn noise_prefactor(&self) -> NoisePrefactor {
        self.noise
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.cov.clone()).eigenvalues.min()
    }

    /// Precomputes the symmetric square root of the covariance.
    pub fn sampler(&self) -> Result<GaussianSampler> {
        let eig = SymmetricEigen::new(self.cov.clone());
        let min = eig.eigenvalues.min();
        if min < -EIGEN_FLOOR {
            return Err(Error::IndefiniteCovariance {
                min_eigenvalue: min,
            });
        }
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let sqrt =
            &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
        Ok(GaussianSampler {
            basis: self.basis.clone(),
            mean: self.mean.clone(),
            sqrt,
        })
    }

    /// Draws one field: `mean + S ξ` with `S = cov^{1/2}`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SpectralField> {
        self.sampler()?.sample(rng)
    }
}

/// Reusable sampler for a fixed [`GaussianLaw`].
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    basis: RealBasis,
    mean: DVector<f64>,
    sqrt: DMatrix<f64>,
}

impl GaussianSampler {
    /// Real-basis coordinates of one draw.
    pub fn sample_coords<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let xi = DVector::from_fn(self.mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.mean + &self.sqrt * xi
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SpectralField> {
        self.basis.from_real(self.sample_coords(rng).as_slice())
    }

    pub fn basis(&self) -> &RealBasis {
        &self.basis
    }
}

/// `A_ρ` as a centred Gaussian law.
pub fn initial_covariance(rho: &BandLimitedProfile, radius: usize) -> Result<GaussianLaw> {
    let a = initial_covariance_form(rho, radius)?;
    let m = a.basis().len();
    GaussianLaw::new(
        rho.d(),
        radius,
        DVector::zeros(m),
        a.matrix().clone(),
        NoisePrefactor::default(),
    )
}

/// Real-basis coordinates of `P_t ζ_0`.
pub fn mean_vector(zeta0: &SpectralField, t: f64, radius: usize) -> Result<Vec<f64>> {
    let basis = RealBasis::new(zeta0.d(), radius)?;
    basis.to_real(&heat_propagate_continuous(zeta0, t)?)
}

/// Law of the limit field at time `t` started from `zeta0_law`:
/// mean decays by the heat semigroup and
/// `cov_t[k,l] = e^{−2π²(|k|²+|l|²)t} cov_0[k,l] + V_t[k,l]`.
pub fn law_at_time(
    rho0: &BandLimitedProfile,
    zeta0_law: &GaussianLaw,
    t: f64,
    noise: NoisePrefactor,
) -> Result<GaussianLaw> {
    if rho0.d() != zeta0_law.d() {
        return Err(Error::DimensionMismatch(
            "profile and initial law dimensions differ".into(),
        ));
    }
    let radius = zeta0_law.radius();
    let v = covariance_v(rho0, t, radius, noise)?;
    let basis = zeta0_law.basis();
    let decay: Vec<f64> = (0..basis.len())
        .map(|i| (-TWO_PI_SQ * basis.mode(i).norm_sq() * t).exp())
        .collect();
    let mean = DVector::from_fn(basis.len(), |i, _| decay[i] * zeta0_law.mean[i]);
    let cov = DMatrix::from_fn(basis.len(), basis.len(), |i, j| {
        decay[i] * decay[j] * zeta0_law.cov[(i, j)] + v.entry(i, j)
    });
    GaussianLaw::new(rho0.d(), radius, mean, cov, noise)
}

/// Mode-labelled CSV of a matrix over a real basis.
pub fn write_covariance_csv(
    basis: &RealBasis,
    m: &DMatrix<f64>,
    mut w: impl Write,
) -> std::io::Result<()> {
    let labels: Vec<String> = (0..basis.len()).map(|i| basis.label(i)).collect();
    writeln!(w, "mode,{}", labels.join(","))?;
    for (i, label) in labels.iter().enumerate() {
        let row: Vec<String> = (0..basis.len())
            .map(|j| format!("{:.16e}", m[(i, j)]))
            .collect();
        writeln!(w, "{label},{}", row.join(","))?;
    }
    Ok(())
}
