use super::profile::{BandLimitedProfile, NoisePrefactor};
use crate::error::{Error, Result};
use crate::torus::{
    heat_propagate_continuous, BilinearForm, ModeIndex, RealBasis, SpectralField, TWO_PI_SQ,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::HashMap;

/// A field of the form `Σ c · e^{−2π² r s} ς_m` as a function of time `s`,
/// grouped by mode `m` and integer rate `r`.
#[derive(Debug, Default)]
struct ExpSeries {
    terms: HashMap<Vec<i64>, Vec<(i64, Complex64)>>,
}

impl ExpSeries {
    fn push(&mut self, m: Vec<i64>, rate: i64, c: Complex64) {
        if c.norm_sqr() == 0.0 {
            return;
        }
        let slot = self.terms.entry(m).or_default();
        match slot.iter_mut().find(|(r, _)| *r == rate) {
            Some((_, acc)) => *acc += c,
            None => slot.push((rate, c)),
        }
    }

    fn nonzero(f: &SpectralField) -> Vec<(ModeIndex, Complex64)> {
        f.modes()
            .iter()
            .zip(f.coeffs())
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(k, c)| (k, *c))
            .collect()
    }

    /// `Φ(P_s ρ) = P_s ρ − (P_s ρ)²`.
    fn phi_of_heat(rho: &SpectralField) -> Self {
        let nz = Self::nonzero(rho);
        let mut s = Self::default();
        for (m, c) in &nz {
            s.push(m.0.clone(), m.norm_sq() as i64, *c);
        }
        for (p, a) in &nz {
            for (q, b) in &nz {
                s.push(p.add(q).0, (p.norm_sq() + q.norm_sq()) as i64, -a * b);
            }
        }
        s
    }

    /// `Φ'(P_s ρ) P_s h = (1 − 2 P_s ρ) P_s h`.
    fn phi_derivative_of_heat(rho: &SpectralField, h: &SpectralField) -> Self {
        let nr = Self::nonzero(rho);
        let nh = Self::nonzero(h);
        let mut s = Self::default();
        for (m, c) in &nh {
            s.push(m.0.clone(), m.norm_sq() as i64, *c);
        }
        for (p, a) in &nr {
            for (q, b) in &nh {
                s.push(p.add(q).0, (p.norm_sq() + q.norm_sq()) as i64, -2.0 * a * b);
            }
        }
        s
    }
}

/// `∫_0^t e^{−α(t−s)} e^{−βs} ds`.
pub(crate) fn exp_convolution(alpha: f64, beta: f64, t: f64) -> f64 {
    let delta = alpha - beta;
    if delta.abs() < 1e-12 {
        t * (-alpha * t).exp()
    } else {
        // e^{−βt} (1 − e^{−δt}) / δ, written to avoid cancellation
        (-beta * t).exp() * (-(-delta * t).exp_m1()) / delta
    }
}

/// Real-basis matrix of the complex-bilinear form with entries
/// `entry(k_a, k_b) = B[ς_a, ς_b]`.
fn assemble(
    basis: &RealBasis,
    entry: impl Fn(&ModeIndex, &ModeIndex) -> Complex64,
) -> DMatrix<f64> {
    let modes = basis.modes();
    let len = modes.len();
    let ks: Vec<ModeIndex> = modes.iter().collect();
    let mut complex = vec![Complex64::new(0.0, 0.0); len * len];
    for a in 0..len {
        for b in a..len {
            let v = entry(&ks[a], &ks[b]);
            complex[a * len + b] = v;
            complex[b * len + a] = v;
        }
    }
    let comps: Vec<_> = (0..len).map(|i| basis.complex_components(i)).collect();
    DMatrix::from_fn(len, len, |i, j| {
        let mut s = Complex64::new(0.0, 0.0);
        for &(a, u) in &comps[i] {
            if u.norm_sqr() == 0.0 {
                continue;
            }
            for &(b, w) in &comps[j] {
                if w.norm_sqr() > 0.0 {
                    s += u * w * complex[a * len + b];
                }
            }
        }
        s.re
    })
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// `A_ρ[φ, ψ] = ⟨ρ(1−ρ) φ, ψ⟩` on the real basis of radius `radius`.
pub fn initial_covariance_form(rho: &BandLimitedProfile, radius: usize) -> Result<BilinearForm> {
    let r = rho.field();
    let phi = r.sub(&r.multiply(r));
    let basis = RealBasis::new(rho.d(), radius)?;
    let m = assemble(&basis, |a, b| phi.coeff(&a.add(b).neg().0));
    BilinearForm::from_matrix(rho.d(), radius, m)
}

/// Covariance of the noise-driven part of the limit field at time `t`:
///
/// `V_t[φ, ψ] = c ∫_0^t ⟨∇P_{t−s}φ · ∇P_{t−s}ψ, Φ(P_s ρ_0)⟩ ds`,
///
/// with `c` the noise prefactor. Every entry is a finite sum of closed-form
/// exponential integrals.
pub fn covariance_v(
    rho0: &BandLimitedProfile,
    t: f64,
    radius: usize,
    noise: NoisePrefactor,
) -> Result<BilinearForm> {
    check_time(t)?;
    let series = ExpSeries::phi_of_heat(rho0.field());
    form_from_series(&series, rho0.d(), t, radius, noise.value())
}

/// Fréchet derivative of `V_t` in `ρ_0` along `h`:
/// `c ∫_0^t ⟨∇P_{t−s}φ · ∇P_{t−s}ψ, Φ'(P_s ρ_0) P_s h⟩ ds`.
pub fn covariance_derivative_dv(
    rho0: &BandLimitedProfile,
    h: &SpectralField,
    t: f64,
    radius: usize,
    noise: NoisePrefactor,
) -> Result<BilinearForm> {
    check_time(t)?;
    h.check_dim(rho0.d())?;
    let series = ExpSeries::phi_derivative_of_heat(rho0.field(), h);
    form_from_series(&series, rho0.d(), t, radius, noise.value())
}

fn form_from_series(
    series: &ExpSeries,
    d: usize,
    t: f64,
    radius: usize,
    c: f64,
) -> Result<BilinearForm> {
    let basis = RealBasis::new(d, radius)?;
    let m = assemble(&basis, |a, b| {
        let dot = a.dot(b);
        if dot == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let Some(terms) = series.terms.get(&a.add(b).neg().0) else {
            return Complex64::new(0.0, 0.0);
        };
        let alpha = TWO_PI_SQ * (a.norm_sq() + b.norm_sq());
        let integral: Complex64 = terms
            .iter()
            .map(|(r, coef)| coef * exp_convolution(alpha, TWO_PI_SQ * *r as f64, t))
            .sum();
        integral * (-c * dot)
    });
    BilinearForm::from_matrix(d, radius, m)
}

/// Composite-Simpson evaluation of the defining time integral of `V_t`, for
/// cross-checking [`covariance_v`]. `steps` is rounded up to an even number.
pub fn covariance_v_quadrature(
    rho0: &BandLimitedProfile,
    t: f64,
    radius: usize,
    noise: NoisePrefactor,
    steps: usize,
) -> Result<BilinearForm> {
    check_time(t)?;
    let steps = (steps.max(2) + 1) & !1;
    let basis = RealBasis::new(rho0.d(), radius)?;
    let len = basis.len();
    let c = noise.value();
    let h = t / steps as f64;
    let mut acc = DMatrix::<f64>::zeros(len, len);
    for i in 0..=steps {
        let s = i as f64 * h;
        let w = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let ps = heat_propagate_continuous(rho0.field(), s)?;
        let phi = ps.sub(&ps.multiply(&ps));
        let m = assemble(&basis, |a, b| {
            let decay = (-TWO_PI_SQ * (a.norm_sq() + b.norm_sq()) * (t - s)).exp();
            phi.coeff(&a.add(b).neg().0) * (-c * a.dot(b) * decay)
        });
        acc += m * w;
    }
    BilinearForm::from_matrix(rho0.d(), radius, acc * (h / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ModeIndex;

    #[test]
    fn closed_form_integral_limits() {
        assert!((exp_convolution(2.0, 2.0, 0.5) - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        let direct = ((-1.0f64 * 0.3).exp() - (-3.0f64 * 0.3).exp()) / 2.0;
        assert!((exp_convolution(3.0, 1.0, 0.3) - direct).abs() < 1e-15);
        assert_eq!(exp_convolution(5.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn constant_profile_diagonal() {
        let rho = BandLimitedProfile::constant(1, 0.3).unwrap();
        let t = 0.02;
        let v = covariance_v(&rho, t, 3, NoisePrefactor::FourPiSq).unwrap();
        for i in 0..v.basis().len() {
            let k2 = v.basis().mode(i).norm_sq();
            for j in 0..v.basis().len() {
                let want = if i == j {
                    0.21 * (1.0 - (-2.0 * TWO_PI_SQ * k2 * t).exp())
                } else {
                    0.0
                };
                assert!((v.entry(i, j) - want).abs() < 1e-14, "{i},{j}");
            }
        }
    }

    #[test]
    fn initial_covariance_at_half() {
        let rho = BandLimitedProfile::constant(2, 0.5).unwrap();
        let a = initial_covariance_form(&rho, 2).unwrap();
        let id = DMatrix::<f64>::identity(25, 25) * 0.25;
        assert!((a.matrix() - id).amax() < 1e-15);
    }

    #[test]
    fn derivative_vanishes_for_zero_direction() {
        let rho = BandLimitedProfile::from_terms(
            1,
            &[
                (ModeIndex::from(0), 0.5, 0.0),
                (ModeIndex::from(1), 0.2, 0.0),
            ],
        )
        .unwrap();
        let h = SpectralField::zeros(1, 2).unwrap();
        let dv = covariance_derivative_dv(&rho, &h, 0.1, 3, NoisePrefactor::FourPiSq).unwrap();
        assert_eq!(dv.matrix().amax(), 0.0);
    }
}
