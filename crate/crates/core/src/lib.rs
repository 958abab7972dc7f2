//! Analysis toolkit for longitudinal smartwatch data.
//!
//! The crate turns raw heart-rate and step-count samples into fixed-grid
//! daily series, groups the series with seven clustering algorithms
//! (k-means, k-shape, kernel k-means, DBSCAN, OPTICS, Ward, SOM), scores
//! the results with intrinsic and extrinsic cluster validation, classifies
//! heart-rate curve shapes (valley / downward / peak / upward), and runs
//! significance-gated temporal statistics. A deterministic synthetic
//! corpus generator with planted ground truth backs the test suites.

pub mod cluster;
pub mod distance;
pub mod eval;
pub mod pattern;
pub mod stats;
pub mod synth;
pub mod timeseries;
