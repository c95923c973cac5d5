//! Second-order cone relaxations and exact extended formulations for
//! box-constrained nonconvex quadratic programs with sparse objectives.
//!
//! An instance `min z'Qz + c'z` over `[0,1]^n` is read into [`instance::SparseQP`]
//! and summarized by its loop graph. From there:
//!
//! - [`relaxation::hierarchy`] builds the level-r perspective relaxation,
//! - [`decomposition::exact_pipeline`] builds the exact formulation when the
//!   plus loops are stable and a suitable tree decomposition exists,
//! - [`conic::assemble`] turns either system into a [`conic::ConicModel`] that
//!   an [`conic::Adapter`] can solve,
//! - [`oracle::global_min`] computes the true optimum of small instances for
//!   comparison.
//!
//! The `qpsoc` binary wraps these steps; see [`cli`].

pub mod cli;
pub mod conic;
pub mod decomposition;
pub mod error;
pub mod hull;
pub mod instance;
pub mod monomial;
pub mod oracle;
pub mod relaxation;

pub use error::{Error, Result};
