//! Quantum frequency combs in a multi-family Kerr microring.
//!
//! The crate goes from resonator tables to entanglement maps in a chain of
//! small pure steps:
//!
//! - [`model`], [`dispersion`]: resonator parameters, damping, normalization
//!   and the resonance grid of each modal family.
//! - [`steady`]: mean-field steady states of a pump and one signal/idler pair.
//! - [`fluct`]: linearized fluctuations, output noise spectra.
//! - [`duan`]: quadrature covariances and the optimized Duan criterion.
//! - [`phases`]: NE / ET / MI classification over pump detuning and amplitude.
//! - [`oracle`]: independent integrators and brute-force checks.
//! - [`config`], [`output`], [`reproduce`], [`cli`]: files in and out.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dispersion;
pub mod duan;
pub mod error;
pub mod fluct;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod output;
pub mod phases;
pub mod reproduce;
pub mod steady;

pub use error::{Error, Result};
