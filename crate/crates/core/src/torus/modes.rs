use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A Fourier mode `k ∈ Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex(pub Vec<i64>);

impl ModeIndex {
    pub fn zero(d: usize) -> Self {
        ModeIndex(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|k|²`.
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&k| (k * k) as f64).sum()
    }

    /// Largest `|k_j|`.
    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn neg(&self) -> Self {
        ModeIndex(self.0.iter().map(|k| -k).collect())
    }

    pub fn dot(&self, other: &ModeIndex) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a * b) as f64)
            .sum()
    }

    pub fn add(&self, other: &ModeIndex) -> Self {
        ModeIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    /// Half-space membership: the first non-zero component is positive.
    pub fn in_positive_half(&self) -> bool {
        self.0.iter().find(|&&k| k != 0).is_some_and(|&k| k > 0)
    }

    /// `k · x` for a point `x` of the torus.
    pub fn phase(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum()
    }
}

impl From<i64> for ModeIndex {
    fn from(k: i64) -> Self {
        ModeIndex(vec![k])
    }
}

impl From<[i64; 2]> for ModeIndex {
    fn from(k: [i64; 2]) -> Self {
        ModeIndex(k.to_vec())
    }
}

/// The box `{-K, …, K}^d` of modes, indexed row-major with offset `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeBox {
    d: usize,
    radius: usize,
}

impl ModeBox {
    pub fn new(d: usize, radius: usize) -> Result<Self> {
        if d == 0 || d > 3 {
            return Err(Error::UnsupportedDimension(d));
        }
        Ok(Self { d, radius })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.len() == self.d
            && k.iter()
                .all(|&kj| kj.unsigned_abs() as usize <= self.radius)
    }

    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        let side = self.side();
        let r = self.radius as i64;
        Some(
            k.iter()
                .fold(0usize, |acc, &kj| acc * side + (kj + r) as usize),
        )
    }

    pub fn mode(&self, mut idx: usize) -> ModeIndex {
        let side = self.side();
        let mut k = vec![0i64; self.d];
        for j in (0..self.d).rev() {
            k[j] = (idx % side) as i64 - self.radius as i64;
            idx /= side;
        }
        ModeIndex(k)
    }

    /// Index of `-k` for the mode stored at `idx`.
    pub fn neg_index(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    pub fn iter(&self) -> impl Iterator<Item = ModeIndex> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }
}
