//! Hierarchical-clustering portfolio allocation.
//!
//! The pipeline turns a look-back window of monthly excess returns into a
//! long-short portfolio:
//!
//! 1. [`estimation`]: sample covariance, optional shrinkage, Pearson
//!    correlation and the distance `sqrt((1 - rho) / 2)`;
//! 2. [`hcluster`]: single-linkage merge tree and its leaf order (seriation);
//! 3. [`allocation`]: recursive bisection of the seriated universe, then
//!    per-asset +1/-1 sides. Markowitz (GMV, tangency) and equal weighting
//!    are available as baselines.
//!
//! [`backtest`] rolls the pipeline through time with non-overlapping
//! buy-and-hold blocks; [`metrics`] and [`report`] summarise and render the
//! results. [`market_data`] loads CSV panels or generates seeded synthetic ones.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory; the
//! `hrplab` binary exposes the same steps as subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod backtest;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod hcluster;
pub mod market_data;
pub mod metrics;
pub mod report;

pub use error::{Error, ErrorKind, Result};
