//! The simple symmetric exclusion process on `T_n^d`: simulation, mean and
//! fluctuation fields, and exact small-lattice oracles.

mod config;
mod field;
mod generator;
mod master;
mod two_point;

pub use config::{sample_initial, simulate, total_rate, Configuration, SimClock};
pub use field::{fluctuation_field, mean_field};
pub use generator::{
    generator_apply_bruteforce, generator_expansion, GeneratorExpansion, TestFunctional,
};
pub use master::{exact_master_distribution, MasterDistribution, MASTER_SITE_LIMIT};
pub use two_point::{exact_two_point, TwoPointTable, TWO_POINT_LIMIT};
