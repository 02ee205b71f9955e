//! Error bounds for Gaussian process regression when the observation noise
//! has bounded support, together with the published bounds they are compared
//! against, benchmark dynamical systems, and a grid-based stochastic barrier
//! certifier that consumes the bounds.
//!
//! The central objects are [`gp::FittedGp`], a kernel-ridge posterior with
//! explicit Cholesky factors, and [`bounds::BoundContext`], which turns a
//! fitted model plus a noise radius and an RKHS norm budget into pointwise
//! probabilistic and deterministic error bounds.

pub mod barrier;
pub mod bounds;
pub mod cli;
pub mod config;
pub mod error;
pub mod gp;
pub mod kernels;
pub mod linalg;
pub mod lp;
pub mod report;
pub mod systems;

pub use error::{Error, Result};
