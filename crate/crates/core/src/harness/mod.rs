//! Experiment driver: particle-versus-Gaussian error curves over a ladder
//! of lattice sizes, power-law rate fits and lemma-level diagnostics.

mod config;
mod curves;
mod diagnostics;
mod engines;

pub use config::{
    Engine, ExperimentConfig, ModeTerm, ObservableSpec, QuadraticTerm, SyntheticSpec, Zeta0Mode,
};
pub use curves::{
    berry_esseen_curve, berry_esseen_table, error_curve, fit_power_law, fit_rate, fit_rate_gated,
    ErrorRow, ErrorTable, RateFit,
};
pub use diagnostics::{
    diagnostics_suite, equilibrium_variances, eta_tau_eta, generator_remainder, gradient_sup_sq,
    inner_product_bound, operator_identity_residual, sobolev_bound, DiagnosticResult,
    DiagnosticsReport, DIAGNOSTIC_N_LIMIT,
};
pub use engines::{
    derive_seed, exact_enumeration_expectation, exact_expectation_second_moment,
    exact_initial_expectation, gaussian_expectation, gaussian_law, initial_profile,
    monte_carlo_expectation, particle_expectation, particle_replica, replica_rng,
    set_worker_threads, Estimate, Execution, EXACT_INITIAL_SITE_LIMIT,
};
