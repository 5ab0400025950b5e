//! Identification of a heavy-tailed structural shock in a VAR by
//! distance-covariance ICA.
//!
//! The pipeline runs bottom-up: simulate or ingest data ([`data`], [`svar`]),
//! fit the reduced form ([`var`]), whiten the residuals ([`whiten`]), rotate
//! them to independence ([`ica`]), test the result ([`independence`]) and
//! trace out impulse responses ([`irf`]). [`montecarlo`] replays the whole
//! chain over a fixed design grid.

pub mod data;
pub mod dcov;
pub mod distributions;
pub mod error;
pub mod ica;
pub mod independence;
pub mod irf;
pub mod montecarlo;
pub mod scalar;
pub mod seed;
pub mod stats;
pub mod svar;
pub mod var;
pub mod whiten;

pub use error::{Error, Result};
pub use scalar::Real;

pub use data::{ingest_csv, read_csv, TimeSeriesMatrix};
pub use dcov::{aggregate_objective, dist_cov, DistCovConfig};
pub use ica::{amari_distance, estimate_unmixing, label_disaster_shock, IcaOptions, IcaResult, SignRule};
pub use independence::{permutation_test, PermutationTestResult};
pub use irf::{irf_choleski, irf_local_projection, irf_var_implied, IrfTable};
pub use montecarlo::{run_grid, ExperimentGrid, MonteCarloReport};
pub use svar::{simulate, SvarModel};
pub use var::{fit_var, VarFit, VarOptions};
pub use whiten::{whiten, WhitenVariant, Whitener};

/// Aggregated-objective evaluator in double precision.
pub type ObjectiveKernel = dcov::ObjectiveKernel<f64>;
/// Single-precision evaluator, for memory-bound batch work.
pub type ObjectiveKernelF32 = dcov::ObjectiveKernel<f32>;
