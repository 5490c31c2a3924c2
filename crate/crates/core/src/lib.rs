//! Coverage path planning for dispersed, irregular plantations.
//!
//! Tree coordinates go in; a closed flight path comes out. The pipeline is:
//!
//! 1. [`density`] splits trees into dense clusters (covered by boustrophedon
//!    sweeps) and sparse trees.
//! 2. [`coverage`] places camera-footprint disks over the sparse trees.
//! 3. One of the [`solver`]s orders the resulting nodes into a closed tour,
//!    trading off distance, cumulative turning angle and self-intersections.
//! 4. [`replan`] slides each waypoint inside its feasible disk to shorten
//!    and smooth the path without losing coverage.
//!
//! [`pipeline::plan`] runs the whole flow.

pub mod coverage;
pub mod density;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod pipeline;
pub mod replan;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::Point;
