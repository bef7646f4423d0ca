//! Popularity-bias and calibration audits for top-N recommenders.
//!
//! The crate covers the whole path from raw rating files to group-level
//! fairness numbers: parse and split data ([`dataset`]), train classical
//! recommenders and produce top-N lists ([`recommend`]), measure popularity
//! lift and genre miscalibration ([`metrics`]), partition users into cohorts
//! ([`cohorts`]), test group differences ([`stats`]) and orchestrate full
//! experiments ([`audit`]).

pub mod audit;
pub mod cohorts;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod recommend;
pub mod stats;
pub mod synth;

pub use error::{Error, ErrorClass, Result};
