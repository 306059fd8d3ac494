use super::basis::RealBasis;
use super::fft::dft_nd;
use super::modes::ModeBox;
use super::spectral::SpectralField;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Symmetric bilinear form on fields truncated to `{-K, …, K}^d`, stored as
/// its matrix in the [`RealBasis`].
#[derive(Debug, Clone)]
pub struct BilinearForm {
    basis: RealBasis,
    matrix: DMatrix<f64>,
}

impl BilinearForm {
    pub fn zeros(d: usize, radius: usize) -> Result<Self> {
        let basis = RealBasis::new(d, radius)?;
        let m = basis.len();
        Ok(Self {
            basis,
            matrix: DMatrix::zeros(m, m),
        })
    }

    /// `A[f, g] = ⟨f, g⟩` restricted to the box.
    pub fn identity(d: usize, radius: usize) -> Result<Self> {
        let basis = RealBasis::new(d, radius)?;
        let m = basis.len();
        Ok(Self {
            basis,
            matrix: DMatrix::identity(m, m),
        })
    }

    /// Accepts a matrix in the real basis; asymmetry beyond roundoff is rejected.
    pub fn from_matrix(d: usize, radius: usize, matrix: DMatrix<f64>) -> Result<Self> {
        let basis = RealBasis::new(d, radius)?;
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "form matrix must be {0}x{0}, got {1}x{2}",
                basis.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "form matrix has non-finite entries".into(),
            ));
        }
        let scale = matrix.amax().max(1.0);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(Error::InvalidArgument(format!(
                "form matrix is not symmetric (gap {asym:e})"
            )));
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self { basis, matrix })
    }

    /// `A[f, g] = ⟨φ, f⟩⟨φ, g⟩`, the form of the kernel `φ(x)φ(y)`.
    pub fn rank_one(phi: &SpectralField, radius: usize) -> Result<Self> {
        Self::weighted_rank_one(phi.d(), radius, &[(1.0, phi.clone())])
    }

    /// `Σ_r w_r φ_r ⊗ φ_r`.
    pub fn weighted_rank_one(
        d: usize,
        radius: usize,
        terms: &[(f64, SpectralField)],
    ) -> Result<Self> {
        let basis = RealBasis::new(d, radius)?;
        let m = basis.len();
        let mut matrix = DMatrix::zeros(m, m);
        for (w, phi) in terms {
            let z = nalgebra::DVector::from_vec(basis.to_real(phi)?);
            matrix += &z * z.transpose() * *w;
        }
        Ok(Self { basis, matrix })
    }

    /// Form of the integral kernel `a(x, y)`:
    /// `A[f, g] = ∫∫ a(x, y) f(x) g(y)`, with the double integral taken by the
    /// `points`-per-axis rectangle rule. `a` must be symmetric.
    pub fn from_kernel(
        d: usize,
        radius: usize,
        points: usize,
        a: impl Fn(&[f64], &[f64]) -> f64,
    ) -> Result<Self> {
        let basis = RealBasis::new(d, radius)?;
        if points < 2 * radius + 1 {
            return Err(Error::InvalidArgument(format!(
                "{points} quadrature points cannot resolve radius {radius}"
            )));
        }
        let dd = 2 * d;
        let total = points.pow(dd as u32);
        let h = 2.0 * std::f64::consts::PI / points as f64;
        let mut data: Vec<Complex64> = (0..total)
            .map(|mut idx| {
                let mut z = vec![0.0; dd];
                for j in (0..dd).rev() {
                    z[j] = h * (idx % points) as f64;
                    idx /= points;
                }
                Complex64::new(a(&z[..d], &z[d..]), 0.0)
            })
            .collect();
        dft_nd(&mut data, points, dd, false);
        let scale = 1.0 / total as f64;
        let modes = basis.modes();
        // K[ς_p, ς_q] = ∫∫ a e^{ip·x} e^{iq·y} = DFT at frequency (-p, -q) / total
        let pos = |p: &[i64], q: &[i64]| {
            p.iter().chain(q).fold(0usize, |acc, &kj| {
                acc * points + (-kj).rem_euclid(points as i64) as usize
            })
        };
        let complex =
            |pa: usize, qb: usize| data[pos(&modes.mode(pa).0, &modes.mode(qb).0)] * scale;
        let m = basis.len();
        let mut matrix = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let mut s = Complex64::new(0.0, 0.0);
                for (pa, u) in basis.complex_components(i) {
                    for (qb, v) in basis.complex_components(j) {
                        if u.norm_sqr() > 0.0 && v.norm_sqr() > 0.0 {
                            s += u * v * complex(pa, qb);
                        }
                    }
                }
                matrix[(i, j)] = s.re;
            }
        }
        Self::from_matrix(d, radius, matrix)
    }

    pub fn basis(&self) -> &RealBasis {
        &self.basis
    }

    pub fn modes(&self) -> ModeBox {
        self.basis.modes()
    }

    pub fn d(&self) -> usize {
        self.modes().d()
    }

    pub fn radius(&self) -> usize {
        self.modes().radius()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Complex-bilinear extension `A[ς_a, ς_b]` for mode-box indices `a`, `b`.
    pub fn complex_entry(&self, a: usize, b: usize) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (i, u) in self.basis.exponential_components(a) {
            if u.norm_sqr() == 0.0 {
                continue;
            }
            for (j, v) in self.basis.exponential_components(b) {
                if v.norm_sqr() > 0.0 {
                    s += u * v * self.matrix[(i, j)];
                }
            }
        }
        s
    }

    /// `A[f, g]` for fields given by their spectral coefficients.
    pub fn apply(&self, f: &SpectralField, g: &SpectralField) -> Result<f64> {
        let zf = nalgebra::DVector::from_vec(self.basis.to_real(f)?);
        let zg = nalgebra::DVector::from_vec(self.basis.to_real(g)?);
        Ok(zf.dot(&(&self.matrix * zg)))
    }

    /// Weighted Hilbert–Schmidt norm `(Σ (1+|k|²)^{-J} (1+|l|²)^{-J} A[e_k, e_l]²)^{1/2}`.
    pub fn hs_norm(&self, j: f64) -> f64 {
        let w: Vec<f64> = (0..self.basis.len())
            .map(|i| (1.0 + self.basis.mode(i).norm_sq()).powf(-j))
            .collect();
        let mut s = 0.0;
        for (c, wc) in w.iter().enumerate() {
            for (r, wr) in w.iter().enumerate() {
                s += wr * wc * self.matrix[(r, c)].powi(2);
            }
        }
        s.sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            basis: self.basis.clone(),
            matrix: &self.matrix * s,
        }
    }

    pub fn add(&self, other: &BilinearForm) -> Result<Self> {
        if self.modes() != other.modes() {
            return Err(Error::DimensionMismatch(
                "forms live on different mode boxes".into(),
            ));
        }
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }
}

/// `Tr A(x) = A[δ_x, δ_x]`: the mode-`l` coefficient is `Σ_k A[ς_{k-l}, ς_{-k}]`.
/// The result lives on the box of radius `2K`.
pub fn trace_of_form(a: &BilinearForm) -> SpectralField {
    let modes = a.modes();
    let out = ModeBox::new(modes.d(), 2 * modes.radius()).expect("dimension already validated");
    let mut coeffs = vec![Complex64::new(0.0, 0.0); out.len()];
    for p in 0..modes.len() {
        let kp = modes.mode(p);
        for q in 0..modes.len() {
            let l = kp.add(&modes.mode(q)).neg();
            let idx = out.index_of(&l.0).expect("sum stays in the doubled box");
            coeffs[idx] += a.complex_entry(p, q);
        }
    }
    SpectralField::from_coeffs(out, coeffs).expect("box sizes agree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ModeIndex;

    #[test]
    fn identity_trace_counts_modes() {
        for (d, r) in [(1, 3), (2, 1)] {
            let a = BilinearForm::identity(d, r).unwrap();
            let tr = trace_of_form(&a);
            let count = (2 * r + 1).pow(d as u32) as f64;
            for (k, c) in tr.modes().iter().zip(tr.coeffs()) {
                let want = if k.is_zero() { count } else { 0.0 };
                assert!((c - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_trace_is_square() {
        let phi = SpectralField::cosine(1, &ModeIndex::from(2), 1.0, 0.4).unwrap();
        let a = BilinearForm::rank_one(&phi, 3).unwrap();
        let tr = trace_of_form(&a);
        let sq = phi.multiply(&phi);
        assert!(tr.sub(&sq).l2_norm() < 1e-14);
    }

    #[test]
    fn complex_entries_of_identity() {
        let a = BilinearForm::identity(2, 2).unwrap();
        let m = a.modes();
        for p in 0..m.len() {
            for q in 0..m.len() {
                let want = if q == m.neg_index(p) { 1.0 } else { 0.0 };
                assert!((a.complex_entry(p, q) - Complex64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hs_norm_of_identity() {
        let a = BilinearForm::identity(1, 1).unwrap();
        let want: f64 = 1.0 + 2.0 * 0.25;
        assert!((a.hs_norm(1.0) - want.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = 1.0;
        assert!(BilinearForm::from_matrix(1, 1, m).is_err());
    }
}
