//! Scoring engine for 2D echocardiographic multi-structure segmentation.
//!
//! Predicted label masks (0 background, 1 LV endocardium, 2 LV myocardium,
//! 3 left atrium) are compared with reference masks using Dice, mean
//! absolute contour distance and Hausdorff distance. LV volumes and ejection
//! fraction come from Simpson's biplane method of discs. The [`harness`]
//! module ties this together into cohort-level reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clinical;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod stats;

pub use error::{Error, Result};

/// Engine version recorded in every report.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
