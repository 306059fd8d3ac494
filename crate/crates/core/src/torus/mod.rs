//! Fourier calculus on the discrete torus `T_n^d` and the continuum torus `T^d`.
//!
//! Lattice sites sit at `x = 2π m / (2n+1)` with `m ∈ {0, …, 2n}` per axis,
//! which is the same point set as `{-n, …, n}` on the torus. Sites are stored
//! row-major over axes. Modes `k` live in a box `{-K, …, K}^d` and refer to
//! the complex exponentials `e^{i k·x}`, orthonormal under the normalized
//! Lebesgue measure.

mod basis;
mod fft;
mod form;
mod grid;
mod modes;
mod ops;
mod spectral;

pub use basis::{RealBasis, RealBasisKind};
pub use form::{trace_of_form, BilinearForm};
pub use grid::{GridField, Lattice};
pub use modes::{ModeBox, ModeIndex};
pub use ops::{
    discrete_derivative, discrete_laplacian, eigenvalue_lambda, eigenvalue_mu,
    heat_propagate_discrete, inner_product_discrete, shift, shift_inverse,
};
pub use spectral::{extend, heat_propagate_continuous, project, sobolev_norm, SpectralField};

/// `2π²`, the diffusion constant of the hydrodynamic heat flow.
pub const TWO_PI_SQ: f64 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
