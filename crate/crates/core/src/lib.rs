//! Monte Carlo toolkit for the semilinear Dirichlet problem `Δu + λuᵖ = 0`
//! on bounded domains of ℝᵈ, d ≥ 3, through its Brownian representation.
//!
//! - [`geometry`]: signed-distance domains and partitions
//! - [`simulate`]: single-path exit, occupation and functional samples
//! - [`estimators`]: deterministic parallel aggregation into estimates
//! - [`oracles`]: closed-form ball/annulus values and quadrature checks
//! - [`conditions`]: the existence conditions, feasible constants, sweeps
//! - [`solver`]: fields, the fixed-point operator, Picard iteration, residuals
//! - [`cli`]: configuration, subcommands and result persistence

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod conditions;
pub mod digest;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod oracles;
pub mod rng;
pub mod simulate;
pub mod solver;

pub use error::{Error, Result};
pub use estimators::{Estimate, ExtremumEstimate, Mode, Quantity};
pub use geometry::{DomainSpec, Partition, Point, Region};
pub use simulate::{PathOutcome, ScalarField, Scheme, SimParams};
