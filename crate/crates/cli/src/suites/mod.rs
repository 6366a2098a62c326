//! Per-module verification batteries. Each suite returns its case records;
//! all randomness is seeded from the run configuration.

pub mod calibration;
pub mod metrics;
pub mod mirror;
pub mod orbifold;
pub mod realalg;
pub mod volume;
