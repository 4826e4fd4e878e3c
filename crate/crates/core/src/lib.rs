//! Rating-scale compression.
//!
//! Ground-truth scores live on a fine integer scale `{0, .., n-1}`. Raters
//! report one of `k` coarse options instead, and the average of the coarse
//! ratings (rescaled) is compared with the true average. This crate computes
//! that error for the floor and rounding (midpoint) compression schemes, both
//! by direct compression of a discrete distribution and by the closed forms
//! that need only `k` statistics of a continuous distribution, and runs the
//! Monte Carlo "which k wins" experiments over random distributions and over
//! real per-item rating datasets.
//!
//! Scores are 0-based everywhere inside the library; datasets on 1-based
//! scales are shifted when they are loaded.

pub mod cli;
pub mod compression;
pub mod distributions;
pub mod error;
pub mod fmt;
pub mod harness;
pub mod ingestion;
pub mod theory;

pub use compression::{
    clamp_regions, compress_pmf, error_floor_discrete, error_rounding_discrete, region_index,
    ClampRange, CompressedPmf, Scheme,
};
pub use distributions::{gen_gaussian_pmf, gen_uniform_pmf, GaussianParams, RngSeed, ScorePmf};
pub use error::{Error, Result};
pub use harness::{
    run_experiment, run_trial, victory_index, write_report, ExperimentConfig, ExperimentReport,
    Model, ReportFormat, SchemeTag,
};
pub use ingestion::{analyze_dataset, item_pmf, parse_ratings_csv, DatasetReport, RatingDataset};

pub use theory::{
    discrete_closed_form_mean, floor_error_continuous, rounding_error_continuous, two_point_spec,
    ContinuousSpec,
};
