//! Simulation and verification primitives for order statistics of Poisson
//! k-tuple functionals and their Weibull-process scaling limits.
//!
//! The crate is `no_std` (with `alloc`). Everything here is a pure function of
//! its inputs plus an explicit [`sampling::SeededStream`]; IO, configuration
//! files and parallel fan-out live in the companion `ostat` crate.
//!
//! Module map:
//!
//! - [`geometry`]: convex windows, flats, intrinsic volumes, Crofton constants
//!   and within-window distances.
//! - [`sampling`]: reproducible Poisson samplers for points, sphere points and
//!   isotropic flats.
//! - [`orderstats`]: threshold enumeration of k-subset values with optional
//!   grid pruning.
//! - [`models`]: the six geometric models behind one [`models::ModelSpec`].
//! - [`limits`]: limit parameters, order-statistic tails, mean tuple counts and
//!   rate bounds.
//! - [`chaos`]: chaos kernels, variance identity and Poisson-approximation
//!   bound ingredients for the indicator U-statistic.
//! - [`stats`]: KS distance, interval-count checks and total variation.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod chaos;
mod error;
pub mod geometry;
pub mod limits;
pub mod linalg;
pub mod models;
pub mod numeric;
pub mod orderstats;
pub mod qmc;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
