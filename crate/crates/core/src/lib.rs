//! Random graphs from graphons with node features from a stationary
//! polynomial-filter signal model, and the tools to measure, predict and
//! control their feature heterophily.
//!
//! The pipeline is:
//!
//! 1. sample a graph from a [`Graphon`] ([`Graphon::sample`]);
//! 2. draw white features `X₀` and filter them, `X = f(𝓛) X₀` with
//!    `𝓛 = (D − A)/n` ([`signal`]);
//! 3. measure `h = Tr(𝓛 X Xᵀ)/n` ([`heterophily`]), compare it with its
//!    expectation `μₙ` and with the graphon limit
//!    [`Graphon::limit_heterophily`];
//! 4. or pick the filter gain for a desired limit up front ([`calibrate`]).

pub mod calibrate;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod graphon;
pub mod heterophily;
pub mod io;
pub mod quadrature;
pub mod rng;
pub mod signal;

pub use calibrate::{calibrate_gain, generate_with_target, CalibrationReference, CalibrationResult};
pub use dataset::{generate, Dataset};
pub use error::{Error, Result};
pub use experiments::{run_concentration, run_convergence, ExperimentConfig, ExperimentKind, ExperimentRow};
pub use graph::GraphSample;
pub use graphon::{sample_graph, Graphon, GraphonFamily, LipschitzBound, ParametricKernel};
pub use heterophily::{
    degree_moment, empirical_heterophily, empirical_heterophily_edge_sum, expected_heterophily_eigen,
    expected_heterophily_trace, spectral_moment, HeterophilyReport,
};
pub use signal::{apply_filter, rescaled_laplacian_matvec, sample_white_features, FeatureMatrix, PolyFilter};

/// Crate version, recorded in reports and manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
