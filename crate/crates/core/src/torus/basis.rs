use super::modes::{ModeBox, ModeIndex};
use super::spectral::SpectralField;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealBasisKind {
    Constant,
    Cos,
    Sin,
}

#[derive(Debug, Clone)]
struct Entry {
    kind: RealBasisKind,
    /// Index of `k` (in the positive half) in the mode box.
    mode: usize,
}

/// Real orthonormal basis `{1, √2 cos(k·x), √2 sin(k·x)}` over a mode box.
///
/// `k` ranges over the half-space whose first non-zero component is positive.
/// Ordering: the constant first, then modes in mode-box order, cosine before
/// sine. The basis has exactly as many elements as the mode box.
#[derive(Debug, Clone)]
pub struct RealBasis {
    modes: ModeBox,
    entries: Vec<Entry>,
}

impl RealBasis {
    pub fn new(d: usize, radius: usize) -> Result<Self> {
        let modes = ModeBox::new(d, radius)?;
        let zero = modes.index_of(&vec![0; d]).expect("zero in box");
        let mut entries = vec![Entry {
            kind: RealBasisKind::Constant,
            mode: zero,
        }];
        for (i, k) in modes.iter().enumerate() {
            if k.in_positive_half() {
                entries.push(Entry {
                    kind: RealBasisKind::Cos,
                    mode: i,
                });
                entries.push(Entry {
                    kind: RealBasisKind::Sin,
                    mode: i,
                });
            }
        }
        debug_assert_eq!(entries.len(), modes.len());
        Ok(Self { modes, entries })
    }

    pub fn modes(&self) -> ModeBox {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn kind(&self, i: usize) -> RealBasisKind {
        self.entries[i].kind
    }

    pub fn mode(&self, i: usize) -> ModeIndex {
        self.modes.mode(self.entries[i].mode)
    }

    /// Human-readable label, e.g. `1`, `cos(1)`, `sin(2;-1)`.
    pub fn label(&self, i: usize) -> String {
        let k = self.mode(i);
        let ks =
            k.0.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(";");
        match self.kind(i) {
            RealBasisKind::Constant => "1".into(),
            RealBasisKind::Cos => format!("cos({ks})"),
            RealBasisKind::Sin => format!("sin({ks})"),
        }
    }

    /// Expansion of basis element `i` in complex exponentials:
    /// `e_i = Σ w ς_k` over at most two `(mode-box index, w)` pairs.
    pub fn complex_components(&self, i: usize) -> [(usize, Complex64); 2] {
        let e = &self.entries[i];
        let neg = self.modes.neg_index(e.mode);
        let s = FRAC_1_SQRT_2;
        match e.kind {
            RealBasisKind::Constant => [
                (e.mode, Complex64::new(1.0, 0.0)),
                (e.mode, Complex64::new(0.0, 0.0)),
            ],
            RealBasisKind::Cos => [
                (e.mode, Complex64::new(s, 0.0)),
                (neg, Complex64::new(s, 0.0)),
            ],
            RealBasisKind::Sin => [
                (e.mode, Complex64::new(0.0, -s)),
                (neg, Complex64::new(0.0, s)),
            ],
        }
    }

    /// Expansion of `ς_k` (mode-box index `a`) in the real basis, as at most
    /// two `(basis index, w)` pairs.
    pub fn exponential_components(&self, a: usize) -> [(usize, Complex64); 2] {
        let k = self.modes.mode(a);
        let s = FRAC_1_SQRT_2;
        if k.is_zero() {
            return [(0, Complex64::new(1.0, 0.0)), (0, Complex64::new(0.0, 0.0))];
        }
        let (pos, sign) = if k.in_positive_half() {
            (a, 1.0)
        } else {
            (self.modes.neg_index(a), -1.0)
        };
        let ci = self.basis_index_of_positive(pos);
        [
            (ci, Complex64::new(s, 0.0)),
            (ci + 1, Complex64::new(0.0, sign * s)),
        ]
    }

    fn basis_index_of_positive(&self, mode: usize) -> usize {
        // entries are ordered by mode index; binary search on the cosine slots
        let mut lo = 1;
        let mut hi = (self.entries.len() - 1) / 2;
        while lo <= hi {
            let mid = (lo + hi) / 2;
            let m = self.entries[2 * mid - 1].mode;
            match m.cmp(&mode) {
                std::cmp::Ordering::Equal => return 2 * mid - 1,
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid - 1,
            }
        }
        unreachable!("mode {mode} is not in the positive half")
    }

    /// Real coordinates `⟨f, e_i⟩` of a spectral field (modes outside the box dropped).
    pub fn to_real(&self, f: &SpectralField) -> Result<Vec<f64>> {
        f.check_dim(self.modes.d())?;
        Ok((0..self.len())
            .map(|i| {
                let e = &self.entries[i];
                let c = f.coeff(&self.modes.mode(e.mode).0);
                match e.kind {
                    RealBasisKind::Constant => c.re,
                    RealBasisKind::Cos => std::f64::consts::SQRT_2 * c.re,
                    RealBasisKind::Sin => -std::f64::consts::SQRT_2 * c.im,
                }
            })
            .collect())
    }

    /// Field with real coordinates `z`.
    pub fn from_real(&self, z: &[f64]) -> Result<SpectralField> {
        if z.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} real coordinates, got {}",
                self.len(),
                z.len()
            )));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.modes.len()];
        for (i, &zi) in z.iter().enumerate() {
            for (a, w) in self.complex_components(i) {
                coeffs[a] += w * zi;
            }
        }
        SpectralField::from_coeffs(self.modes, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_orthonormality() {
        for (d, r) in [(1, 3), (2, 2)] {
            let basis = RealBasis::new(d, r).unwrap();
            assert_eq!(basis.len(), (2 * r + 1).pow(d as u32));
            let z: Vec<f64> = (0..basis.len()).map(|i| (i as f64 * 0.37).sin()).collect();
            let f = basis.from_real(&z).unwrap();
            let back = basis.to_real(&f).unwrap();
            for (a, b) in z.iter().zip(&back) {
                assert!((a - b).abs() < 1e-14);
            }
            // Parseval: ‖f‖² = Σ z²
            let norm2: f64 = z.iter().map(|v| v * v).sum();
            assert!((f.pairing(&f) - norm2).abs() < 1e-12);
        }
    }

    #[test]
    fn exponential_components_invert_complex_components() {
        let basis = RealBasis::new(2, 2).unwrap();
        for a in 0..basis.modes().len() {
            // Σ_i w_{a,i} e_i should equal ς_a
            let mut coeffs = vec![Complex64::new(0.0, 0.0); basis.modes().len()];
            for (i, w) in basis.exponential_components(a) {
                for (b, u) in basis.complex_components(i) {
                    coeffs[b] += w * u;
                }
            }
            for (b, c) in coeffs.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((c - Complex64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn labels() {
        let basis = RealBasis::new(1, 1).unwrap();
        let labels: Vec<_> = (0..3).map(|i| basis.label(i)).collect();
        assert_eq!(labels, ["1", "cos(1)", "sin(1)"]);
    }
}
