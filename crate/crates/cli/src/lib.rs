//! Command-line verification lab for linear connections on almost contact
//! manifolds with Norden metric.

pub mod cli;
pub mod engine;
pub mod registry;
pub mod report;
pub mod spec;
pub mod suites;
pub mod sweep;
