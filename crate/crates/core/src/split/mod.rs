//! Feature-to-party splitting strategies.

mod brkga;
mod correlation;
mod importance;

pub use brkga::{decode_keys, minimize_permutation, BrkgaConfig, BrkgaOutcome, PermutationGenome};
pub use correlation::{
    equal_counts, icor_of_permutation, optimize_extreme, partition_from_permutation,
    split_by_correlation, CorrSplitResult, ExtremeDirection,
};
pub use importance::{sample_dirichlet, split_by_importance, DirichletSpec};

pub(crate) use correlation::{extreme_bounds_from_corr, shuffle_bounds_from_corr};
