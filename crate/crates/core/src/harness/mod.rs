//! Monte Carlo experiments, the small-system oracle and statistical comparisons.

mod experiment;
mod oracle;
mod sampler;
mod stats;
pub mod suite;

pub use experiment::{
    run_experiment, scalar, stationary_target, write_ecdf, Experiment, Observable, RunOutput, ECDF_FILE, MANIFEST_FILE,
    MANIFEST_VERSION, RECORDS_FILE,
};
pub use oracle::{exact_small_system, SmallSystemLaw, MAX_STATES};
pub use sampler::{
    light_cone, second_class_replica, shock_replica, stationary_replica, SecondClassSample, ShockSample,
    StationaryTarget,
};
pub use stats::{
    difference_cdf, dkw_bound, ks_compare, ks_two_sample, normal_cdf, product_gaussian_cdf, EmpiricalCdf, KsResult,
    ProductFw,
};
