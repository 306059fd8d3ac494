//! Exact finite-mode Gaussian law of the limiting generalized
//! Ornstein–Uhlenbeck fluctuation field for band-limited initial profiles.

mod covariance;
mod law;
mod profile;

pub use covariance::{
    covariance_derivative_dv, covariance_v, covariance_v_quadrature, initial_covariance_form,
};
pub use law::{
    initial_covariance, law_at_time, mean_vector, write_covariance_csv, GaussianLaw,
    GaussianSampler, EIGEN_FLOOR,
};
pub use profile::{BandLimitedProfile, NoisePrefactor, PhiProfile, RANGE_CHECK_POINTS};
