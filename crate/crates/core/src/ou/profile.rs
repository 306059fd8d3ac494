use crate::error::{Error, Result};
use crate::torus::{GridField, Lattice, ModeIndex, SpectralField};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Points per axis of the grid on which profile ranges are checked.
pub const RANGE_CHECK_POINTS: usize = 1024;

/// Noise profile `Φ` of the limiting equation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiProfile {
    /// `Φ(x) = max(x(1−x), 0)`.
    #[default]
    ClampedLogistic,
}

impl PhiProfile {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::ClampedLogistic => (x * (1.0 - x)).max(0.0),
        }
    }

    /// `Φ'` on `[0, 1]`.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Self::ClampedLogistic => {
                if (0.0..=1.0).contains(&x) {
                    1.0 - 2.0 * x
                } else {
                    0.0
                }
            }
        }
    }
}

/// Constant in front of the noise term of the limiting covariance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisePrefactor {
    /// `4π²`, the value matching the particle system.
    #[default]
    FourPiSq,
    /// `2π²`, as printed in the covariance formula of the source text.
    PaperLiteral,
}

impl NoisePrefactor {
    pub fn value(&self) -> f64 {
        match self {
            Self::FourPiSq => 4.0 * PI * PI,
            Self::PaperLiteral => 2.0 * PI * PI,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::FourPiSq => "4pi^2",
            Self::PaperLiteral => "2pi^2",
        }
    }
}

/// A real trigonometric polynomial with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandLimitedProfile {
    field: SpectralField,
}

impl BandLimitedProfile {
    /// Checks the range of `field` on the dense grid.
    pub fn new(field: SpectralField) -> Result<Self> {
        if !(1..=2).contains(&field.d()) {
            return Err(Error::UnsupportedDimension(field.d()));
        }
        let values = field.sample_uniform(RANGE_CHECK_POINTS);
        let h = 2.0 * PI / RANGE_CHECK_POINTS as f64;
        for (idx, &v) in values.iter().enumerate() {
            if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                let location = if field.d() == 1 {
                    format!("x={:.6}", h * idx as f64)
                } else {
                    let (i, j) = (idx / RANGE_CHECK_POINTS, idx % RANGE_CHECK_POINTS);
                    format!("x=({:.6}, {:.6})", h * i as f64, h * j as f64)
                };
                return Err(Error::ProfileOutOfRange { value: v, location });
            }
        }
        Ok(Self { field })
    }

    /// `ρ(x) = Σ amplitude · cos(k·x + phase)` over the given terms.
    pub fn from_terms(d: usize, terms: &[(ModeIndex, f64, f64)]) -> Result<Self> {
        for (k, _, _) in terms {
            if k.dim() != d {
                return Err(Error::DimensionMismatch(format!("mode {:?} in d={d}", k.0)));
            }
        }
        let radius = terms
            .iter()
            .map(|(k, _, _)| k.max_abs() as usize)
            .max()
            .unwrap_or(0);
        let mut f = SpectralField::zeros(d, radius)?;
        for (k, a, p) in terms {
            f.add_cosine(k, *a, *p)?;
        }
        Self::new(f)
    }

    pub fn constant(d: usize, c: f64) -> Result<Self> {
        Self::from_terms(d, &[(ModeIndex::zero(d), c, 0.0)])
    }

    pub fn field(&self) -> &SpectralField {
        &self.field
    }

    pub fn d(&self) -> usize {
        self.field.d()
    }

    /// Mean density `∫ ρ`.
    pub fn mean(&self) -> f64 {
        self.field.coeff(&vec![0; self.d()]).re
    }

    /// Point values on the lattice, `ρ_0^n = ρ|_{T_n^d}`.
    pub fn restrict(&self, lattice: Lattice) -> Result<GridField> {
        let g = self.field.restrict(lattice)?;
        Ok(g.map(|v| v.clamp(0.0, 1.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_enforced() {
        assert!(BandLimitedProfile::from_terms(
            1,
            &[
                (ModeIndex::from(0), 0.5, 0.0),
                (ModeIndex::from(1), 0.3, 0.0)
            ]
        )
        .is_ok());
        let err = BandLimitedProfile::from_terms(
            1,
            &[
                (ModeIndex::from(0), 0.5, 0.0),
                (ModeIndex::from(2), 0.6, 0.0),
            ],
        );
        assert!(matches!(err, Err(Error::ProfileOutOfRange { .. })));
        assert!(BandLimitedProfile::constant(2, 1.0).is_ok());
    }

    #[test]
    fn phi_clamps() {
        let p = PhiProfile::ClampedLogistic;
        assert_eq!(p.value(-0.5), 0.0);
        assert_eq!(p.value(0.5), 0.25);
        assert_eq!(p.derivative(0.5), 0.0);
    }
}
