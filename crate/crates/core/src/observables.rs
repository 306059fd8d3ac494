//! Test functionals of the fluctuation field, evaluated the same way on
//! particle fields and on Gaussian samples.

use crate::error::{Error, Result};
use crate::ou::GaussianLaw;
use crate::torus::{
    extend, inner_product_discrete, project, sobolev_norm, BilinearForm, GridField, Lattice,
    RealBasis, SpectralField,
};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Scalar link functions `f: R^m → R` from a fixed catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Link {
    /// `Σ_j c_j x^j` of a single pairing, degree at most 4.
    Polynomial { coeffs: Vec<f64> },
    /// `Π_i x_i^{p_i}`, total degree at most 4.
    Monomial { powers: Vec<u32> },
    /// `cos(ω Σ_i x_i)`.
    Cos { freq: f64 },
    /// `sin(ω Σ_i x_i)`.
    Sin { freq: f64 },
    /// `exp(c · tanh(Σ_i x_i / c))`, a smooth bounded stand-in for `exp`.
    ExpClip { clip: f64 },
}

impl Link {
    fn validate(&self, m: usize) -> Result<()> {
        match self {
            Self::Polynomial { coeffs } => {
                if m != 1 {
                    return Err(Error::InvalidArgument(
                        "polynomial link takes one pairing".into(),
                    ));
                }
                if coeffs.len() > 5 {
                    return Err(Error::InvalidArgument("polynomial degree exceeds 4".into()));
                }
            }
            Self::Monomial { powers } => {
                if powers.len() != m {
                    return Err(Error::DimensionMismatch(format!(
                        "{} powers for {m} pairings",
                        powers.len()
                    )));
                }
                if powers.iter().sum::<u32>() > 4 {
                    return Err(Error::InvalidArgument("monomial degree exceeds 4".into()));
                }
            }
            Self::ExpClip { clip } if !(*clip > 0.0) => {
                return Err(Error::InvalidArgument("clip must be positive".into()));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let s: f64 = x.iter().sum();
        match self {
            Self::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x[0] + c),
            Self::Monomial { powers } => x
                .iter()
                .zip(powers)
                .map(|(v, &p)| v.powi(p as i32))
                .product(),
            Self::Cos { freq } => (freq * s).cos(),
            Self::Sin { freq } => (freq * s).sin(),
            Self::ExpClip { clip } => (clip * (s / clip).tanh()).exp(),
        }
    }

    /// Sup-norm bounds of the first three derivatives, when finite.
    pub fn derivative_bounds(&self) -> Option<[f64; 3]> {
        match self {
            Self::Cos { freq } | Self::Sin { freq } => {
                let w = freq.abs();
                Some([w, w * w, w * w * w])
            }
            // crude but valid: tanh and its derivatives are bounded by small constants
            Self::ExpClip { clip } => {
                let e = clip.exp();
                let c = 1.0 / clip;
                Some([e, e * (1.0 + c), e * (1.0 + 3.0 * c + 2.0 * c * c)])
            }
            _ => None,
        }
    }
}

/// The observable catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// `⟨φ, ζ⟩`.
    Linear(SpectralField),
    /// `f(⟨φ_1, ζ⟩, …, ⟨φ_m, ζ⟩)`.
    Smooth {
        link: Link,
        phis: Vec<SpectralField>,
    },
    /// `A[ζ, ζ]`.
    Quadratic(BilinearFormSpec),
}

/// A quadratic form given as `Σ_r w_r φ_r ⊗ φ_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearFormSpec {
    pub terms: Vec<(f64, SpectralField)>,
}

impl BilinearFormSpec {
    pub fn to_form(&self, radius: usize) -> Result<BilinearForm> {
        let d = self.terms.first().map(|(_, p)| p.d()).ok_or_else(|| {
            Error::InvalidArgument("quadratic observable needs at least one term".into())
        })?;
        BilinearForm::weighted_rank_one(d, radius, &self.terms)
    }
}

impl Observable {
    pub fn smooth(link: Link, phis: Vec<SpectralField>) -> Result<Self> {
        if phis.is_empty() {
            return Err(Error::InvalidArgument(
                "smooth observable needs at least one φ".into(),
            ));
        }
        link.validate(phis.len())?;
        Ok(Self::Smooth { link, phis })
    }

    pub fn d(&self) -> usize {
        match self {
            Self::Linear(p) => p.d(),
            Self::Smooth { phis, .. } => phis[0].d(),
            Self::Quadratic(q) => q.terms.first().map_or(0, |(_, p)| p.d()),
        }
    }

    /// Largest mode radius among the test functions.
    pub fn radius(&self) -> usize {
        match self {
            Self::Linear(p) => p.radius(),
            Self::Smooth { phis, .. } => phis.iter().map(|p| p.radius()).max().unwrap_or(0),
            Self::Quadratic(q) => q.terms.iter().map(|(_, p)| p.radius()).max().unwrap_or(0),
        }
    }

    /// Whether the observable is a polynomial of degree at most 4 in the field.
    pub fn is_polynomial(&self) -> bool {
        match self {
            Self::Linear(_) | Self::Quadratic(_) => true,
            Self::Smooth { link, .. } => {
                matches!(link, Link::Polynomial { .. } | Link::Monomial { .. })
            }
        }
    }

    fn test_functions(&self) -> Vec<&SpectralField> {
        match self {
            Self::Linear(p) => vec![p],
            Self::Smooth { phis, .. } => phis.iter().collect(),
            Self::Quadratic(q) => q.terms.iter().map(|(_, p)| p).collect(),
        }
    }

    fn combine(&self, pairings: &[f64]) -> f64 {
        match self {
            Self::Linear(_) => pairings[0],
            Self::Smooth { link, .. } => link.eval(pairings),
            Self::Quadratic(q) => q
                .terms
                .iter()
                .zip(pairings)
                .map(|((w, _), p)| w * p * p)
                .sum(),
        }
    }

    /// Value on a particle fluctuation field: pairings are `⟨pr_n φ, ζ⟩_n`.
    pub fn eval_on_particle(&self, zeta: &GridField) -> Result<f64> {
        self.on_lattice(zeta.lattice())?.eval(zeta)
    }

    /// Value on a continuum field given by its Fourier coefficients.
    pub fn eval_on_gaussian_sample(&self, zeta: &SpectralField) -> Result<f64> {
        let p: Vec<f64> = self
            .test_functions()
            .iter()
            .map(|phi| {
                phi.check_dim(zeta.d())?;
                Ok(phi.pairing(zeta))
            })
            .collect::<Result<_>>()?;
        Ok(self.combine(&p))
    }

    /// Evaluator with the projected test functions cached for one lattice.
    pub fn on_lattice(&self, lattice: Lattice) -> Result<LatticeObservable> {
        let grids = self
            .test_functions()
            .into_iter()
            .map(|phi| project(phi, lattice))
            .collect::<Result<_>>()?;
        Ok(LatticeObservable {
            obs: self.clone(),
            grids,
        })
    }

    /// Evaluator on real-basis coordinates of a Gaussian draw.
    pub fn on_basis(&self, basis: &RealBasis) -> Result<CoordObservable> {
        let coords = self
            .test_functions()
            .into_iter()
            .map(|phi| basis.to_real(phi).map(DVector::from_vec))
            .collect::<Result<_>>()?;
        Ok(CoordObservable {
            obs: self.clone(),
            coords,
        })
    }

    /// `E F(ζ)` for `ζ` with the given Gaussian law, in closed form.
    ///
    /// Polynomial observables use Isserlis pairings of the mean and
    /// covariance of the pairings; `cos`/`sin` links use the Gaussian
    /// characteristic function. Other links have no closed form.
    pub fn gaussian_expectation_closed_form(&self, law: &GaussianLaw) -> Result<f64> {
        let zs: Vec<DVector<f64>> = self
            .test_functions()
            .into_iter()
            .map(|phi| law.basis().to_real(phi).map(DVector::from_vec))
            .collect::<Result<_>>()?;
        let mu = law.mean();
        let cov = law.cov();
        let means: Vec<f64> = zs.iter().map(|z| z.dot(mu)).collect();
        let c = |i: usize, j: usize| zs[i].dot(&(cov * &zs[j]));
        match self {
            Self::Linear(_) => Ok(means[0]),
            Self::Quadratic(q) => Ok(q
                .terms
                .iter()
                .enumerate()
                .map(|(r, (w, _))| w * (c(r, r) + means[r] * means[r]))
                .sum()),
            Self::Smooth { link, phis } => {
                let m = phis.len();
                let covm: Vec<Vec<f64>> =
                    (0..m).map(|i| (0..m).map(|j| c(i, j)).collect()).collect();
                match link {
                    Link::Polynomial { coeffs } => Ok(coeffs
                        .iter()
                        .enumerate()
                        .map(|(p, a)| a * isserlis(&vec![0; p], &means, &covm))
                        .sum()),
                    Link::Monomial { powers } => {
                        let idx: Vec<usize> = powers
                            .iter()
                            .enumerate()
                            .flat_map(|(i, &p)| std::iter::repeat_n(i, p as usize))
                            .collect();
                        Ok(isserlis(&idx, &means, &covm))
                    }
                    Link::Cos { freq } | Link::Sin { freq } => {
                        let mean: f64 = means.iter().sum();
                        let var: f64 = covm.iter().flatten().sum();
                        let damp = (-0.5 * freq * freq * var).exp();
                        Ok(if matches!(link, Link::Cos { .. }) {
                            (freq * mean).cos() * damp
                        } else {
                            (freq * mean).sin() * damp
                        })
                    }
                    Link::ExpClip { .. } => Err(Error::NoClosedForm(format!("{link:?}"))),
                }
            }
        }
    }
}

/// `E Π_a X_{idx[a]}` for jointly Gaussian `X` with the given means and covariances.
fn isserlis(idx: &[usize], means: &[f64], cov: &[Vec<f64>]) -> f64 {
    let Some((&first, rest)) = idx.split_first() else {
        return 1.0;
    };
    let mut total = means[first] * isserlis(rest, means, cov);
    for j in 0..rest.len() {
        let mut reduced = rest.to_vec();
        let partner = reduced.remove(j);
        total += cov[first][partner] * isserlis(&reduced, means, cov);
    }
    total
}

/// An [`Observable`] with its projected test functions on one lattice.
#[derive(Debug, Clone)]
pub struct LatticeObservable {
    obs: Observable,
    grids: Vec<GridField>,
}

impl LatticeObservable {
    pub fn eval(&self, zeta: &GridField) -> Result<f64> {
        let p: Vec<f64> = self
            .grids
            .iter()
            .map(|g| inner_product_discrete(g, zeta))
            .collect::<Result<_>>()?;
        Ok(self.obs.combine(&p))
    }
}

/// An [`Observable`] acting on real-basis coordinates.
#[derive(Debug, Clone)]
pub struct CoordObservable {
    obs: Observable,
    coords: Vec<DVector<f64>>,
}

impl CoordObservable {
    pub fn eval(&self, z: &DVector<f64>) -> f64 {
        let p: Vec<f64> = self.coords.iter().map(|c| c.dot(z)).collect();
        self.obs.combine(&p)
    }
}

/// Truncated `H_{−I}` norm of `ex_n ζ`.
pub fn sobolev_norm_minus_i(zeta: &GridField, i: f64) -> f64 {
    sobolev_norm(&extend(zeta), -i)
}

/// Truncated `H_{−I}` norm of a continuum field.
pub fn sobolev_norm_minus_i_spectral(zeta: &SpectralField, i: f64) -> f64 {
    sobolev_norm(zeta, -i)
}
