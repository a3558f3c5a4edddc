//! Solver library for the general cluster routing problem (GCRP): find a
//! minimum-cost closed walk that visits every required vertex exactly once,
//! traverses every required edge at least once, and keeps each cluster's
//! vertices consecutive.
//!
//! The crate bundles the approximation pipeline (cluster paths via general
//! path constructions, stitched together through stacker-crane / rural-postman
//! subroutines) with exact brute-force oracles so that every ratio guarantee
//! can be checked empirically at small scale.

pub mod arcrouting;
pub mod graphkit;
pub mod instance;
pub mod metric;
pub mod oracle;
pub mod pathsolver;
pub mod runner;
pub mod solver;
pub mod validity;

pub use metric::{Cost, CostMatrix, Metric};
