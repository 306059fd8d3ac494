use super::config::{check_profile, Configuration};
use crate::error::{Error, Result};
use crate::torus::{heat_propagate_discrete, GridField};

/// `ρ_t^n = E η_t^n`, the solution of `∂_t ρ = 2π² Δ_n ρ`.
pub fn mean_field(rho0: &GridField, t: f64) -> Result<GridField> {
    check_profile(rho0)?;
    let rho = heat_propagate_discrete(rho0, t)?;
    // the flow obeys the maximum principle; clip FFT roundoff at the ends
    Ok(rho.map(|v| v.clamp(0.0, 1.0)))
}

/// `ζ(x) = (2n+1)^{d/2} (η(x) − ρ_t(x))`.
pub fn fluctuation_field(eta: &Configuration, rho_t: &GridField) -> Result<GridField> {
    let lat = eta.lattice();
    if lat != rho_t.lattice() {
        return Err(Error::DimensionMismatch(format!(
            "configuration on {lat:?}, profile on {:?}",
            rho_t.lattice()
        )));
    }
    let scale = (lat.sites() as f64).sqrt();
    let values = rho_t
        .values()
        .iter()
        .enumerate()
        .map(|(x, r)| scale * (if eta.get(x) { 1.0 } else { 0.0 } - r))
        .collect();
    GridField::new(lat, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{inner_product_discrete, Lattice};

    #[test]
    fn fluctuation_mass_matches_count() {
        let lat = Lattice::new(3, 1).unwrap();
        let eta =
            Configuration::from_occupancies(lat, &[true, true, false, true, false, false, false])
                .unwrap();
        let rho = GridField::constant(lat, 0.25);
        let z = fluctuation_field(&eta, &rho).unwrap();
        let one = GridField::constant(lat, 1.0);
        let want = 7f64.sqrt() * (3.0 / 7.0 - 0.25);
        assert!((inner_product_discrete(&z, &one).unwrap() - want).abs() < 1e-14);
        let zero = fluctuation_field(&Configuration::empty(lat), &GridField::zeros(lat)).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
    }
}
