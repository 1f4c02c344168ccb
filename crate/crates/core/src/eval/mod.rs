//! Party-level evaluation: Shapley importance, the default ridge value
//! function, and the reverse estimators recovering generator parameters from
//! a real partition.

mod estimate;
mod ridge;
mod shapley;

pub use estimate::{
    dirichlet_mean_variance, estimate_alpha, estimate_alpha_from_importances, estimate_beta,
    estimate_beta_by_shuffling, symmetric_alpha_from_variance, symmetric_dirichlet_variance,
    AlphaEstimate, BetaEstimate, FLAT_RANGE_THRESHOLD,
};
pub use ridge::{RidgeValue, Task, DEFAULT_RIDGE_LAMBDA};
pub use shapley::{
    party_shapley, shapley_exact, shapley_monte_carlo, CharacteristicFn, ShapleyEstimate,
    ShapleyMethod, EXACT_ENUMERATION_MAX_PARTIES,
};
