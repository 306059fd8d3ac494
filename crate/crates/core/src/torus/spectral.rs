use super::fft::dft_nd;
use super::grid::{GridField, Lattice};
use super::modes::{ModeBox, ModeIndex};
use super::TWO_PI_SQ;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Truncated Fourier series `Σ_{|k_j| ≤ K} c_k e^{i k·x}` of a real function
/// on `T^d`. Coefficients are kept Hermitian, `c_{-k} = conj(c_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    modes: ModeBox,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(d: usize, radius: usize) -> Result<Self> {
        let modes = ModeBox::new(d, radius)?;
        Ok(Self {
            modes,
            coeffs: vec![Complex64::new(0.0, 0.0); modes.len()],
        })
    }

    /// Builds a field from coefficients, enforcing Hermitian symmetry by
    /// averaging `c_k` with `conj(c_{-k})`.
    pub fn from_coeffs(modes: ModeBox, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != modes.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                modes.len(),
                coeffs.len()
            )));
        }
        let mut field = Self { modes, coeffs };
        field.symmetrize();
        Ok(field)
    }

    /// Single real mode: `amplitude · cos(k·x + phase)`.
    pub fn cosine(d: usize, k: &ModeIndex, amplitude: f64, phase: f64) -> Result<Self> {
        let radius = k.max_abs() as usize;
        let mut f = Self::zeros(d, radius)?;
        f.add_cosine(k, amplitude, phase)?;
        Ok(f)
    }

    /// Adds `amplitude · cos(k·x + phase)`; the box must already contain `k`.
    pub fn add_cosine(&mut self, k: &ModeIndex, amplitude: f64, phase: f64) -> Result<()> {
        let idx = self.modes.index_of(&k.0).ok_or_else(|| {
            Error::InvalidArgument(format!("mode {:?} outside radius {}", k.0, self.radius()))
        })?;
        if k.is_zero() {
            self.coeffs[idx] += Complex64::new(amplitude * phase.cos(), 0.0);
        } else {
            let half = Complex64::from_polar(0.5 * amplitude, phase);
            self.coeffs[idx] += half;
            let neg = self.modes.neg_index(idx);
            self.coeffs[neg] += half.conj();
        }
        Ok(())
    }

    /// Fourier coefficients of a continuous periodic function by the
    /// `points`-per-axis rectangle rule (spectrally accurate for smooth input).
    pub fn from_function(
        d: usize,
        radius: usize,
        points: usize,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let modes = ModeBox::new(d, radius)?;
        if points < 2 * radius + 1 {
            return Err(Error::InvalidArgument(format!(
                "{points} quadrature points cannot resolve radius {radius}"
            )));
        }
        let total = points.pow(d as u32);
        let h = 2.0 * std::f64::consts::PI / points as f64;
        let mut data: Vec<Complex64> = (0..total)
            .map(|mut idx| {
                let mut x = vec![0.0; d];
                for j in (0..d).rev() {
                    x[j] = h * (idx % points) as f64;
                    idx /= points;
                }
                Complex64::new(f(&x), 0.0)
            })
            .collect();
        dft_nd(&mut data, points, d, false);
        let scale = 1.0 / total as f64;
        let coeffs = (0..modes.len())
            .map(|i| {
                let k = modes.mode(i);
                let pos = k.0.iter().fold(0usize, |acc, &kj| {
                    acc * points + kj.rem_euclid(points as i64) as usize
                });
                data[pos] * scale
            })
            .collect();
        Self::from_coeffs(modes, coeffs)
    }

    pub fn modes(&self) -> ModeBox {
        self.modes
    }

    pub fn d(&self) -> usize {
        self.modes.d()
    }

    pub fn radius(&self) -> usize {
        self.modes.radius()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `e^{i k·x}`; zero outside the stored box.
    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.modes
            .index_of(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    fn symmetrize(&mut self) {
        let len = self.coeffs.len();
        for i in 0..=len / 2 {
            let j = self.modes.neg_index(i);
            let avg = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
            self.coeffs[i] = avg;
            self.coeffs[j] = avg.conj();
        }
    }

    /// Re-boxes to a new radius, zero-padding or discarding modes.
    pub fn resized(&self, radius: usize) -> SpectralField {
        let modes = ModeBox::new(self.d(), radius).expect("dimension already validated");
        let coeffs = modes.iter().map(|k| self.coeff(&k.0)).collect();
        SpectralField { modes, coeffs }
    }

    /// Point evaluation `Σ c_k e^{i k·x}`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.modes
            .iter()
            .zip(&self.coeffs)
            .map(|(k, c)| {
                let p = k.phase(x);
                c.re * p.cos() - c.im * p.sin()
            })
            .sum()
    }

    /// Real bilinear pairing `∫ f g` under the normalized measure.
    pub fn pairing(&self, other: &SpectralField) -> f64 {
        if self.radius() <= other.radius() {
            self.modes
                .iter()
                .zip(&self.coeffs)
                .map(|(k, a)| (a * other.coeff(&k.0).conj()).re)
                .sum()
        } else {
            other.pairing(self)
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        SpectralField {
            modes: self.modes,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Sum of two fields on the larger of the two boxes.
    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let radius = self.radius().max(other.radius());
        let mut out = self.resized(radius);
        for (k, c) in out.modes.iter().zip(out.coeffs.iter_mut()) {
            *c += other.coeff(&k.0);
        }
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        self.add(&other.scale(-1.0))
    }

    /// Product of two band-limited fields (exact convolution of coefficients).
    pub fn multiply(&self, other: &SpectralField) -> SpectralField {
        let radius = self.radius() + other.radius();
        let modes = ModeBox::new(self.d(), radius).expect("dimension already validated");
        let mut coeffs = vec![Complex64::new(0.0, 0.0); modes.len()];
        for (p, a) in self.modes.iter().zip(&self.coeffs) {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (q, b) in other.modes.iter().zip(&other.coeffs) {
                let idx = modes.index_of(&p.add(&q).0).expect("sum stays in the box");
                coeffs[idx] += a * b;
            }
        }
        SpectralField { modes, coeffs }
    }

    /// Values on a uniform grid of `points` per axis (row-major). Modes
    /// aliasing onto the same grid frequency are summed.
    pub fn sample_uniform(&self, points: usize) -> Vec<f64> {
        let d = self.d();
        let mut data = vec![Complex64::new(0.0, 0.0); points.pow(d as u32)];
        for (k, c) in self.modes.iter().zip(&self.coeffs) {
            let pos = k.0.iter().fold(0usize, |acc, &kj| {
                acc * points + kj.rem_euclid(points as i64) as usize
            });
            data[pos] += c;
        }
        dft_nd(&mut data, points, d, true);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Exact restriction to the lattice sites (point evaluation, aliasing
    /// included). Differs from [`project`] when the field has modes above `n`.
    pub fn restrict(&self, lattice: Lattice) -> Result<GridField> {
        self.check_dim(lattice.d())?;
        GridField::new(lattice, self.sample_uniform(lattice.side()))
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.d() != d {
            return Err(Error::DimensionMismatch(format!(
                "field has d={}, expected d={d}",
                self.d()
            )));
        }
        Ok(())
    }
}

/// Trigonometric interpolation `ex_n f`: the field with coefficients
/// `⟨f, ς_k⟩_n` for `k ∈ {-n, …, n}^d`.
pub fn extend(f: &GridField) -> SpectralField {
    let lattice = f.lattice();
    let side = lattice.side();
    let d = lattice.d();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft_nd(&mut data, side, d, false);
    let modes = ModeBox::new(d, lattice.n()).expect("lattice dimension is valid");
    let scale = 1.0 / lattice.sites() as f64;
    let coeffs = modes
        .iter()
        .map(|k| {
            let pos = k.0.iter().fold(0usize, |acc, &kj| {
                acc * side + kj.rem_euclid(side as i64) as usize
            });
            data[pos] * scale
        })
        .collect();
    SpectralField::from_coeffs(modes, coeffs).expect("box sizes agree")
}

/// `pr_n g` evaluated on the lattice: modes with some `|k_j| > n` are dropped.
pub fn project(g: &SpectralField, lattice: Lattice) -> Result<GridField> {
    g.check_dim(lattice.d())?;
    g.resized(g.radius().min(lattice.n())).restrict(lattice)
}

/// Continuous heat semigroup `P_t`: mode `k` decays by `exp(-2π²|k|² t)`.
pub fn heat_propagate_continuous(g: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let coeffs = g
        .modes()
        .iter()
        .zip(g.coeffs())
        .map(|(k, c)| c * (-TWO_PI_SQ * k.norm_sq() * t).exp())
        .collect();
    Ok(SpectralField {
        modes: g.modes(),
        coeffs,
    })
}

/// Truncated Sobolev norm `(Σ_k (1+|k|²)^J |c_k|²)^{1/2}` over the stored box.
pub fn sobolev_norm(g: &SpectralField, j: f64) -> f64 {
    g.modes()
        .iter()
        .zip(g.coeffs())
        .map(|(k, c)| (1.0 + k.norm_sq()).powf(j) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn constant_extends_to_zero_mode() {
        let lat = Lattice::new(3, 1).unwrap();
        let f = GridField::constant(lat, 0.7);
        let e = extend(&f);
        for (k, c) in e.modes().iter().zip(e.coeffs()) {
            let want = if k.is_zero() { 0.7 } else { 0.0 };
            assert!((c.re - want).abs() < 1e-14 && c.im.abs() < 1e-14);
        }
    }

    #[test]
    fn sampled_cosine_has_half_coefficients() {
        for n in 1..6 {
            let lat = Lattice::new(n, 1).unwrap();
            let f = GridField::from_fn(lat, |x| SQRT_2 * x[0].cos());
            let e = extend(&f);
            for (k, c) in e.modes().iter().zip(e.coeffs()) {
                let want = if k.0[0].abs() == 1 { 1.0 / SQRT_2 } else { 0.0 };
                assert!(
                    (c - Complex64::new(want, 0.0)).norm() < 1e-12,
                    "n={n} k={k:?}"
                );
            }
        }
    }

    #[test]
    fn projection_of_high_mode_vanishes() {
        let lat = Lattice::new(2, 1).unwrap();
        let g = SpectralField::cosine(1, &ModeIndex::from(3), 1.0, 0.0).unwrap();
        let p = project(&g, lat).unwrap();
        assert!(p.sup_norm() < 1e-15);
        let g = SpectralField::cosine(1, &ModeIndex::from(2), 1.0, 0.3).unwrap();
        let p = project(&g, lat).unwrap();
        for i in 0..lat.sites() {
            let x = lat.position(i);
            assert!((p.values()[i] - (2.0 * x[0] + 0.3).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn sobolev_norm_of_unit_mode() {
        let g = SpectralField::cosine(2, &ModeIndex::from([1, 2]), 2.0, 0.0).unwrap();
        // two coefficients of modulus 1 at ±k, |k|² = 5
        for j in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            let want = (2.0 * 6f64.powf(j)).sqrt();
            assert!((sobolev_norm(&g, j) - want).abs() < 1e-12);
        }
        let one = SpectralField::cosine(1, &ModeIndex::from(0), 1.0, 0.0).unwrap();
        assert!((sobolev_norm(&one, 7.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn continuous_heat_semigroup() {
        let mut g = SpectralField::zeros(1, 4).unwrap();
        g.add_cosine(&ModeIndex::from(0), 0.4, 0.0).unwrap();
        g.add_cosine(&ModeIndex::from(3), 0.2, 1.1).unwrap();
        g.add_cosine(&ModeIndex::from(1), -0.5, 0.2).unwrap();
        assert_eq!(heat_propagate_continuous(&g, 0.0).unwrap(), g);
        let a = heat_propagate_continuous(&heat_propagate_continuous(&g, 0.013).unwrap(), 0.021)
            .unwrap();
        let b = heat_propagate_continuous(&g, 0.034).unwrap();
        assert!(a.sub(&b).l2_norm() < 1e-12);
        assert!((b.coeff(&[0]).re - 0.4).abs() < 1e-15);
        assert!(matches!(
            heat_propagate_continuous(&g, -1.0),
            Err(Error::NegativeTime(_))
        ));
    }

    #[test]
    fn restrict_matches_pointwise_evaluation() {
        let lat = Lattice::new(2, 2).unwrap();
        let mut g = SpectralField::zeros(2, 3).unwrap();
        g.add_cosine(&ModeIndex::from([3, -1]), 0.5, 0.2).unwrap();
        g.add_cosine(&ModeIndex::from([1, 1]), 0.25, 0.0).unwrap();
        let r = g.restrict(lat).unwrap();
        for i in 0..lat.sites() {
            assert!((r.values()[i] - g.evaluate(&lat.position(i))).abs() < 1e-13);
        }
    }
}
