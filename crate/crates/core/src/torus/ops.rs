use super::grid::{GridField, Lattice};
use super::modes::ModeIndex;
use super::spectral::{extend, project};
use super::TWO_PI_SQ;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Normalized site sum `⟨f, g⟩_n = (2n+1)^{-d} Σ_x f(x) g(x)`.
pub fn inner_product_discrete(f: &GridField, g: &GridField) -> Result<f64> {
    f.check_same(g)?;
    let s: f64 = f.values().iter().zip(g.values()).map(|(a, b)| a * b).sum();
    Ok(s / f.lattice().sites() as f64)
}

/// Forward difference `∂_{n,j} f(x) = (2n+1)/(2π) (f(x+e_j) - f(x))`.
pub fn discrete_derivative(f: &GridField, axis: usize) -> Result<GridField> {
    let lat = f.lattice();
    lat.check_axis(axis)?;
    let scale = lat.side() as f64 / (2.0 * PI);
    let v = f.values();
    let out = (0..lat.sites())
        .map(|x| scale * (v[lat.neighbor(x, axis, true)] - v[x]))
        .collect();
    GridField::new(lat, out)
}

/// `Δ_n f(x) = (2n+1)²/(4π²) Σ_j (f(x+e_j) + f(x-e_j) - 2 f(x))`.
pub fn discrete_laplacian(f: &GridField) -> GridField {
    let lat = f.lattice();
    let scale = (lat.side() as f64).powi(2) / (4.0 * PI * PI);
    let v = f.values();
    let out = (0..lat.sites())
        .map(|x| {
            let s: f64 = (0..lat.d())
                .map(|j| v[lat.neighbor(x, j, true)] + v[lat.neighbor(x, j, false)] - 2.0 * v[x])
                .sum();
            scale * s
        })
        .collect();
    GridField::new(lat, out).expect("same lattice")
}

/// `τ_j f(x) = f(x + e_j)`.
pub fn shift(f: &GridField, axis: usize) -> Result<GridField> {
    shift_by(f, axis, true)
}

/// `τ_j^{-1} f(x) = f(x - e_j)`.
pub fn shift_inverse(f: &GridField, axis: usize) -> Result<GridField> {
    shift_by(f, axis, false)
}

fn shift_by(f: &GridField, axis: usize, forward: bool) -> Result<GridField> {
    let lat = f.lattice();
    lat.check_axis(axis)?;
    let v = f.values();
    let out = (0..lat.sites())
        .map(|x| v[lat.neighbor(x, axis, forward)])
        .collect();
    GridField::new(lat, out)
}

fn check_resolvable(k: &ModeIndex, n: usize) -> Result<()> {
    if k.max_abs() as usize > n {
        return Err(Error::ModeOutOfRange {
            mode: k.0.clone(),
            n,
        });
    }
    Ok(())
}

/// `λ_k^n = (2n+1)²/(2π²) Σ_j (1 - cos(2π k_j / (2n+1)))`, so `Δ_n ς_k = -λ_k^n ς_k`.
pub fn eigenvalue_lambda(k: &ModeIndex, n: usize) -> Result<f64> {
    check_resolvable(k, n)?;
    let side = (2 * n + 1) as f64;
    let s: f64 =
        k.0.iter()
            .map(|&kj| 1.0 - (2.0 * PI * kj as f64 / side).cos())
            .sum();
    Ok(side * side / (2.0 * PI * PI) * s)
}

/// `μ_{k,j}^n = (2n+1)/(2π) (e^{2πi k_j/(2n+1)} - 1)`, so `∂_{n,j} ς_k = μ ς_k`.
pub fn eigenvalue_mu(k: &ModeIndex, axis: usize, n: usize) -> Result<Complex64> {
    check_resolvable(k, n)?;
    if axis >= k.dim() {
        return Err(Error::InvalidAxis { axis, d: k.dim() });
    }
    let side = (2 * n + 1) as f64;
    let theta = 2.0 * PI * k.0[axis] as f64 / side;
    Ok((Complex64::from_polar(1.0, theta) - 1.0) * (side / (2.0 * PI)))
}

/// Exact solution of `∂_t ρ = 2π² Δ_n ρ`: mode `k` decays by `exp(-2π² λ_k^n t)`.
pub fn heat_propagate_discrete(f: &GridField, t: f64) -> Result<GridField> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let lat = f.lattice();
    let decay = heat_decay_factors(lat, t);
    let spec = extend(f);
    let coeffs = spec
        .coeffs()
        .iter()
        .zip(&decay)
        .map(|(c, g)| c * g)
        .collect();
    let spec = super::SpectralField::from_coeffs(spec.modes(), coeffs)?;
    project(&spec, lat)
}

/// Per-mode decay `exp(-2π² λ_k^n t)` in the mode-box order of radius `n`.
pub(crate) fn heat_decay_factors(lat: Lattice, t: f64) -> Vec<f64> {
    let modes = super::ModeBox::new(lat.d(), lat.n()).expect("valid lattice");
    modes
        .iter()
        .map(|k| {
            let lambda = eigenvalue_lambda(&k, lat.n()).expect("k in box");
            (-TWO_PI_SQ * lambda * t).exp()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_single_site() {
        for n in [1, 4, 9] {
            let lat = Lattice::new(n, 1).unwrap();
            let one = GridField::constant(lat, 1.0);
            assert!((inner_product_discrete(&one, &one).unwrap() - 1.0).abs() < 1e-15);
        }
        let lat = Lattice::new(1, 1).unwrap();
        let mut e = GridField::zeros(lat);
        e.values_mut()[2] = 1.0;
        assert!((inner_product_discrete(&e, &e).unwrap() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn mismatched_lattices_rejected() {
        let a = GridField::zeros(Lattice::new(1, 1).unwrap());
        let b = GridField::zeros(Lattice::new(2, 1).unwrap());
        assert!(matches!(
            inner_product_discrete(&a, &b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn lambda_small_case() {
        let l = eigenvalue_lambda(&ModeIndex::from(1), 1).unwrap();
        assert!((l - 13.5 / (2.0 * PI * PI)).abs() < 1e-14);
        assert!((l - 0.683_917).abs() < 1e-6);
        assert_eq!(eigenvalue_lambda(&ModeIndex::from(0), 5).unwrap(), 0.0);
        assert_eq!(
            eigenvalue_mu(&ModeIndex::from(0), 0, 5).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!(matches!(
            eigenvalue_lambda(&ModeIndex::from(2), 1),
            Err(Error::ModeOutOfRange { .. })
        ));
    }

    #[test]
    fn derivative_and_laplacian_kill_constants() {
        let lat = Lattice::new(3, 2).unwrap();
        let c = GridField::constant(lat, 2.5);
        assert!(discrete_derivative(&c, 1).unwrap().sup_norm() < 1e-13);
        assert!(discrete_laplacian(&c).sup_norm() < 1e-12);
        assert!(matches!(
            discrete_derivative(&c, 2),
            Err(Error::InvalidAxis { .. })
        ));
    }

    #[test]
    fn shift_round_trip() {
        let lat = Lattice::new(2, 2).unwrap();
        let f = GridField::from_fn(lat, |x| x[0].sin() + 2.0 * x[1]);
        for axis in 0..2 {
            let back = shift_inverse(&shift(&f, axis).unwrap(), axis).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn discrete_heat_on_cosine_n1() {
        let lat = Lattice::new(1, 1).unwrap();
        let f = GridField::from_fn(lat, |x| x[0].cos());
        let g = heat_propagate_discrete(&f, 0.1).unwrap();
        let c = extend(&g).coeff(&[1]);
        assert!((c.re - 0.5 * (-1.35f64).exp()).abs() < 1e-14);
        assert_eq!(heat_propagate_discrete(&f, 0.0).unwrap(), f);
        let k = GridField::constant(lat, 0.3);
        let kk = heat_propagate_discrete(&k, 3.0).unwrap();
        assert!(kk.values().iter().all(|v| (v - 0.3).abs() < 1e-15));
        assert!(heat_propagate_discrete(&f, -0.1).is_err());
    }
}
