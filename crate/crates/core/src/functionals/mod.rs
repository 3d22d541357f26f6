//! Rate functionals along paths: the following cost `I`, its jump-augmented
//! version `J`, the growth rate `K̃` and the bottleneck-aware `K`; the straight
//! line rate `κ` with its positive region and slope paths; the interval
//! quantities that bound the number of particles near a path.

mod envelope;
mod kappa;
pub mod quad;
mod rate;

pub use envelope::{
    case_quantity, delta_bound, envelope_rates, interval_case_quantities, CaseQuantity, CaseTag, IntervalRates,
};
pub use kappa::{
    build_h, gamma_path, gamma_waypoints, kappa, kappa_map_csv, kappa_region, kappa_region_contains, GammaPath,
    HConstruction, KappaPoint, Region, DIAG_HI, DIAG_LO, MU_MAX, PIVOT,
};
pub use rate::{
    integrated_rate, rate_i, rate_j, rate_k, rate_k_with, rate_ktilde, rate_ktilde_both, rate_ktilde_expanded,
    KOptions, RateReport,
};
