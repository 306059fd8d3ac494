use super::config::Configuration;
use super::field::fluctuation_field;
use crate::error::{Error, Result};
use crate::torus::{
    discrete_derivative, discrete_laplacian, extend, inner_product_discrete, project, BilinearForm,
    GridField, SpectralField,
};
use nalgebra::DVector;
use std::f64::consts::PI;

/// Test functionals `F` of the continuum field with hard-coded derivatives.
#[derive(Debug, Clone)]
pub enum TestFunctional {
    /// `F(h) = ⟨φ, h⟩`.
    Linear(SpectralField),
    /// `F(h) = ⟨φ, h⟩²`.
    Square(SpectralField),
    /// `F(h) = A[h, h]`.
    Quadratic(BilinearForm),
}

impl TestFunctional {
    pub fn eval(&self, h: &SpectralField) -> Result<f64> {
        match self {
            Self::Linear(phi) => Ok(phi.pairing(h)),
            Self::Square(phi) => Ok(phi.pairing(h).powi(2)),
            Self::Quadratic(a) => a.apply(h, h),
        }
    }

    /// Riesz representative of `DF(h)`.
    pub fn gradient(&self, h: &SpectralField) -> Result<SpectralField> {
        match self {
            Self::Linear(phi) => Ok(phi.clone()),
            Self::Square(phi) => Ok(phi.scale(2.0 * phi.pairing(h))),
            Self::Quadratic(a) => {
                let z = DVector::from_vec(a.basis().to_real(h)?);
                let g = a.matrix() * z * 2.0;
                a.basis().from_real(g.as_slice())
            }
        }
    }

    /// `D²F`, constant for every supported functional.
    pub fn hessian(&self) -> Result<Option<BilinearForm>> {
        match self {
            Self::Linear(_) => Ok(None),
            Self::Square(phi) => Ok(Some(BilinearForm::rank_one(phi, phi.radius())?.scale(2.0))),
            Self::Quadratic(a) => Ok(Some(a.scale(2.0))),
        }
    }

    fn d(&self) -> usize {
        match self {
            Self::Linear(p) | Self::Square(p) => p.d(),
            Self::Quadratic(a) => a.d(),
        }
    }
}

/// `G(η) = F(ex_n ζ)` with `ζ = (2n+1)^{d/2}(η − ρ)`.
fn composed(f: &TestFunctional, rho: &GridField, eta: &Configuration) -> Result<f64> {
    f.eval(&extend(&fluctuation_field(eta, rho)?))
}

/// `𝒢_n (F∘ex_n)(η) = ((2n+1)²/2) Σ_edges [G(η^{x↔x+e_j}) − G(η)]` by direct
/// enumeration of all edges.
pub fn generator_apply_bruteforce(
    f: &TestFunctional,
    rho: &GridField,
    eta: &Configuration,
) -> Result<f64> {
    let lat = eta.lattice();
    if f.d() != lat.d() {
        return Err(Error::DimensionMismatch(
            "functional and lattice dimensions differ".into(),
        ));
    }
    let base = composed(f, rho, eta)?;
    let mut acc = 0.0;
    for x in 0..lat.sites() {
        for j in 0..lat.d() {
            let y = lat.neighbor(x, j, true);
            if eta.get(x) == eta.get(y) {
                continue;
            }
            let mut swapped = eta.clone();
            swapped.swap(x, y);
            acc += composed(f, rho, &swapped)? - base;
        }
    }
    let side = lat.side() as f64;
    Ok(side * side / 2.0 * acc)
}

/// The two leading terms of the generator expansion of `F∘ex_n` applied to
/// `G(η) = F(ex_n ζ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorExpansion {
    /// `2π² ⟨Δ_n pr_n DG, η⟩_n`.
    pub first: f64,
    /// `4π⁴ (2n+1)^{-(d+2)} Σ_j ⟨Tr(∂_{n,j}^{⊗2} pr_n^{⊗2} D²G), (∂_{n,j} η)²⟩_n`.
    pub second: f64,
}

impl GeneratorExpansion {
    pub fn total(&self) -> f64 {
        self.first + self.second
    }
}

pub fn generator_expansion(
    f: &TestFunctional,
    rho: &GridField,
    eta: &Configuration,
) -> Result<GeneratorExpansion> {
    let lat = eta.lattice();
    let sites = lat.sites() as f64;
    let side = lat.side() as f64;
    let zeta_hat = extend(&fluctuation_field(eta, rho)?);
    let eta_field = eta.as_field();

    // DG = (2n+1)^{d/2} DF
    let dg = project(&f.gradient(&zeta_hat)?, lat)?.map(|v| v * sites.sqrt());
    let first = 2.0 * PI * PI * inner_product_discrete(&discrete_laplacian(&dg), &eta_field)?;

    let second = match f.hessian()? {
        None => 0.0,
        Some(h) => {
            // D²G = (2n+1)^d D²F
            let basis = h.basis();
            let mut total = 0.0;
            for j in 0..lat.d() {
                let grads = (0..basis.len())
                    .map(|i| {
                        let mut z = vec![0.0; basis.len()];
                        z[i] = 1.0;
                        discrete_derivative(&project(&basis.from_real(&z)?, lat)?, j)
                    })
                    .collect::<Result<Vec<GridField>>>()?;
                let trace: Vec<f64> = (0..lat.sites())
                    .map(|x| {
                        let g: Vec<f64> = grads.iter().map(|g| g.values()[x]).collect();
                        let gv = DVector::from_vec(g);
                        sites * gv.dot(&(h.matrix() * &gv))
                    })
                    .collect();
                let trace = GridField::new(lat, trace)?;
                let deta = discrete_derivative(&eta_field, j)?.map(|v| v * v);
                total += inner_product_discrete(&trace, &deta)?;
            }
            4.0 * PI.powi(4) / side.powi(lat.d() as i32 + 2) * total
        }
    };
    Ok(GeneratorExpansion { first, second })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{Lattice, ModeIndex};

    #[test]
    fn full_configuration_has_zero_generator() {
        let lat = Lattice::new(3, 1).unwrap();
        let phi = SpectralField::cosine(1, &ModeIndex::from(1), 1.0, 0.0).unwrap();
        let rho = GridField::constant(lat, 0.5);
        let f = TestFunctional::Square(phi);
        let g = generator_apply_bruteforce(&f, &rho, &Configuration::full(lat)).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn square_expansion_is_exact_small_case() {
        let lat = Lattice::new(2, 1).unwrap();
        let phi = SpectralField::cosine(1, &ModeIndex::from(1), 1.3, 0.2).unwrap();
        let rho = GridField::from_fn(lat, |x| 0.5 + 0.2 * x[0].sin());
        let eta = Configuration::from_occupancies(lat, &[true, false, false, true, true]).unwrap();
        let f = TestFunctional::Square(phi);
        let brute = generator_apply_bruteforce(&f, &rho, &eta).unwrap();
        let exp = generator_expansion(&f, &rho, &eta).unwrap();
        assert!(
            (brute - exp.total()).abs() <= 1e-9 * brute.abs().max(1.0),
            "{brute} vs {exp:?}"
        );
    }
}
