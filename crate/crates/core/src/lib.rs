//! Quantifies how degrading the temporal resolution of a wind-speed record
//! changes its distribution and the energy a turbine would be credited with.
//!
//! The pipeline is: [`ingest`] raw observations and keep complete UTC days,
//! derive lower-resolution series with [`resample`] (block averages or
//! instantaneous subsamples), compare distributions with [`dist_stats`],
//! fit parametric models with [`param_fit`], and convert speeds to energy
//! with [`power_model`]. [`report`] holds the serialization helpers shared by
//! the command-line front end.

pub mod dist_stats;
pub mod error;
pub mod ingest;
pub mod optim;
pub mod param_fit;
pub mod power_model;
pub mod report;
pub mod resample;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    GenGammaParams, KsResult, Provenance, ResampleMode, ResampleSpec, WeibullParams, WindSeries,
};
