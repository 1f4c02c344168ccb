//! Feature-partitioning toolkit for vertical federated learning benchmarks.
//!
//! A global table is split column-wise across parties, either
//! importance-driven (Dirichlet weights decide how many features each party
//! receives) or correlation-driven (a genetic permutation search places the
//! inter-party correlation at a requested point between the achievable
//! extremes). The inverse direction is covered too: given an existing
//! partition, estimate the concentration and interpolation parameters that
//! would reproduce its character.
//!
//! Everything is deterministic under a seed, including parallel sections.

pub mod corr;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod harness;
pub mod io;
pub mod split;

pub use corr::{CorrelationKind, GlobalCorr, PcorOptions};
pub use dataset::{CscMatrix, FeatureStorage, GlobalDataset, ImageLayout, PartyPartition};
pub use error::{Error, Result};
pub use eval::{
    estimate_alpha, estimate_beta, party_shapley, AlphaEstimate, BetaEstimate, RidgeValue,
    ShapleyEstimate, ShapleyMethod, Task,
};
pub use io::{load_csv, load_libsvm, materialize_parties, LabelColumn, SplitManifest};
pub use split::{
    split_by_correlation, split_by_importance, BrkgaConfig, CorrSplitResult, DirichletSpec,
};
