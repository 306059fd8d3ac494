use super::config::check_profile;
use crate::error::{Error, Result};
use crate::ode::dopri45;
use crate::torus::{eigenvalue_lambda, extend, GridField, Lattice, SpectralField, TWO_PI_SQ};

/// Largest ODE dimension `(2n+1)^{2d}` accepted by [`exact_two_point`].
pub const TWO_POINT_LIMIT: usize = 100_000;

const ODE_TOL: f64 = 1e-10;

/// Off-diagonal occupancy covariances `V(t,x,y) = E η_t(x)η_t(y) − ρ_t(x)ρ_t(y)`.
///
/// Stored without any `(2n+1)^{-d}` normalisation; the diagonal is 0.
#[derive(Debug, Clone)]
pub struct TwoPointTable {
    lattice: Lattice,
    t: f64,
    v: Vec<f64>,
    rho_t: GridField,
}

impl TwoPointTable {
    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Mean field at the table's time.
    pub fn rho_t(&self) -> &GridField {
        &self.rho_t
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.v[x * self.lattice.sites() + y]
    }

    /// Row-major `sites × sites` matrix.
    pub fn values(&self) -> &[f64] {
        &self.v
    }

    /// `E ⟨ζ_t, φ⟩_n ⟨ζ_t, ψ⟩_n`, exactly.
    ///
    /// Equals `(2n+1)^{-d} [Σ_x ρ_t(1−ρ_t) φψ + Σ_{x≠y} V(t,x,y) φ(x) ψ(y)]`.
    pub fn second_moment(&self, phi: &GridField, psi: &GridField) -> Result<f64> {
        phi.check_same(&self.rho_t)?;
        psi.check_same(&self.rho_t)?;
        let sites = self.lattice.sites();
        let (p, q, r) = (phi.values(), psi.values(), self.rho_t.values());
        let diag: f64 = (0..sites).map(|x| r[x] * (1.0 - r[x]) * p[x] * q[x]).sum();
        let off: f64 = (0..sites)
            .map(|x| {
                let row = &self.v[x * sites..(x + 1) * sites];
                p[x] * row.iter().zip(q).map(|(v, b)| v * b).sum::<f64>()
            })
            .sum();
        Ok((diag + off) / sites as f64)
    }
}

/// `ρ_t` from `ρ_0` via the spectral solution of the discrete heat equation.
pub(crate) struct HeatEvolver {
    lattice: Lattice,
    spec: SpectralField,
    rates: Vec<f64>,
}

impl HeatEvolver {
    pub(crate) fn new(rho0: &GridField) -> Self {
        let lattice = rho0.lattice();
        let spec = extend(rho0);
        let rates = spec
            .modes()
            .iter()
            .map(|k| TWO_PI_SQ * eigenvalue_lambda(&k, lattice.n()).expect("k in box"))
            .collect();
        Self {
            lattice,
            spec,
            rates,
        }
    }

    pub(crate) fn at(&self, t: f64) -> Vec<f64> {
        let coeffs = self
            .spec
            .coeffs()
            .iter()
            .zip(&self.rates)
            .map(|(c, r)| c * (-r * t).exp())
            .collect();
        SpectralField::from_coeffs(self.spec.modes(), coeffs)
            .expect("box sizes agree")
            .sample_uniform(self.lattice.side())
    }
}

/// Integrates the closed evolution of the two-point function
///
/// `dV/dt = ℒV − ((2n+1)²/2) Σ_{e∈E_1} (ρ_t(x) − ρ_t(y))² 1{x+e=y}`, `V(0) = 0`,
///
/// where `ℒ` is the generator of two exclusion particles, each jumping to a
/// neighbour at rate `(2n+1)²/2` unless it is occupied by the other.
pub fn exact_two_point(rho0: &GridField, t: f64) -> Result<TwoPointTable> {
    check_profile(rho0)?;
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let lattice = rho0.lattice();
    let sites = lattice.sites();
    if sites * sites > TWO_POINT_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            sites: sites * sites,
            limit: TWO_POINT_LIMIT,
        });
    }
    let nbrs: Vec<Vec<usize>> = (0..sites)
        .map(|x| {
            (0..lattice.d())
                .flat_map(|j| [lattice.neighbor(x, j, true), lattice.neighbor(x, j, false)])
                .collect()
        })
        .collect();
    let side = lattice.side() as f64;
    let rate = side * side / 2.0;
    let heat = HeatEvolver::new(rho0);
    let mut v = vec![0.0; sites * sites];
    dopri45(&mut v, 0.0, t, ODE_TOL, |s, v, dv| {
        let rho = heat.at(s);
        for x in 0..sites {
            for y in 0..sites {
                let i = x * sites + y;
                if x == y {
                    dv[i] = 0.0;
                    continue;
                }
                let here = v[i];
                let mut acc = 0.0;
                for &xp in &nbrs[x] {
                    if xp == y {
                        let g = rho[x] - rho[y];
                        acc -= g * g;
                    } else {
                        acc += v[xp * sites + y] - here;
                    }
                }
                for &yp in &nbrs[y] {
                    if yp != x {
                        acc += v[x * sites + yp] - here;
                    }
                }
                dv[i] = rate * acc;
            }
        }
    });
    let rho_t = GridField::new(
        lattice,
        heat.at(t).into_iter().map(|r| r.clamp(0.0, 1.0)).collect(),
    )?;
    Ok(TwoPointTable {
        lattice,
        t,
        v,
        rho_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile_has_no_correlations() {
        let lat = Lattice::new(3, 1).unwrap();
        let tab = exact_two_point(&GridField::constant(lat, 0.3), 0.2).unwrap();
        assert!(tab.values().iter().all(|v| v.abs() < 1e-15));
        let one = GridField::constant(lat, 1.0);
        assert!((tab.second_moment(&one, &one).unwrap() - 0.21).abs() < 1e-14);
    }

    #[test]
    fn zero_time_is_zero() {
        let lat = Lattice::new(2, 1).unwrap();
        let rho = GridField::from_fn(lat, |x| 0.5 + 0.3 * x[0].cos());
        let tab = exact_two_point(&rho, 0.0).unwrap();
        assert!(tab.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cap_enforced() {
        let lat = Lattice::new(9, 2).unwrap();
        assert!(matches!(
            exact_two_point(&GridField::constant(lat, 0.5), 0.1),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }
}
