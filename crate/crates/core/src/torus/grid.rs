use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The discrete torus `T_n^d` with `(2n+1)^d` sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    n: usize,
    d: usize,
}

impl Lattice {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if !(1..=2).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        if n == 0 {
            return Err(Error::InvalidArgument(
                "lattice parameter n must be >= 1".into(),
            ));
        }
        Ok(Self { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Points per axis, `2n+1`.
    pub fn side(&self) -> usize {
        2 * self.n + 1
    }

    pub fn sites(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    /// Number of unordered nearest-neighbour edges, `d (2n+1)^d`.
    pub fn edges(&self) -> usize {
        self.d * self.sites()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.side().pow((self.d - 1 - axis) as u32)
    }

    /// Per-axis integer coordinates `m ∈ {0, …, 2n}` of a site.
    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let side = self.side();
        let mut m = vec![0; self.d];
        for j in (0..self.d).rev() {
            m[j] = idx % side;
            idx /= side;
        }
        m
    }

    pub fn site_index(&self, m: &[usize]) -> usize {
        m.iter()
            .fold(0, |acc, &mj| acc * self.side() + mj % self.side())
    }

    /// Position `2π m / (2n+1)` of a site on `T^d`.
    pub fn position(&self, idx: usize) -> Vec<f64> {
        let h = 2.0 * PI / self.side() as f64;
        self.coords(idx).into_iter().map(|m| h * m as f64).collect()
    }

    /// Neighbour `x + e_j` (forward) or `x - e_j` (backward), periodic.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, forward: bool) -> usize {
        let side = self.side();
        let stride = self.stride(axis);
        let m = (idx / stride) % side;
        if forward {
            if m == side - 1 {
                idx - (side - 1) * stride
            } else {
                idx + stride
            }
        } else if m == 0 {
            idx + (side - 1) * stride
        } else {
            idx - stride
        }
    }

    pub(crate) fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.d {
            Err(Error::InvalidAxis { axis, d: self.d })
        } else {
            Ok(())
        }
    }
}

/// Real values on the sites of a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    lattice: Lattice,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.sites() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} site values, got {}",
                lattice.sites(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite site value {v}")));
        }
        Ok(Self { lattice, values })
    }

    pub fn constant(lattice: Lattice, c: f64) -> Self {
        Self {
            lattice,
            values: vec![c; lattice.sites()],
        }
    }

    pub fn zeros(lattice: Lattice) -> Self {
        Self::constant(lattice, 0.0)
    }

    /// Samples `f` at every site position.
    pub fn from_fn(lattice: Lattice, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..lattice.sites())
            .map(|i| f(&lattice.position(i)))
            .collect();
        Self { lattice, values }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Maximum norm `‖f‖_{n,C}`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            lattice: self.lattice,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            lattice: self.lattice,
            values,
        })
    }

    pub(crate) fn check_same(&self, other: &GridField) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::DimensionMismatch(format!(
                "lattices differ: {:?} vs {:?}",
                self.lattice, other.lattice
            )));
        }
        Ok(())
    }
}
