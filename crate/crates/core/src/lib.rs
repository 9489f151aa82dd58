//! Time-splitting Fourier pseudo-spectral solvers for the logarithmic
//! Schrodinger equation `i u_t = -Δu + λ u ln|u|^2` and its regularized
//! variants, with exact Gausson solutions for verification.
//!
//! Parallel loops use rayon behind the default `parallel` feature; without it
//! every path runs sequentially and produces identical numbers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod config;
pub mod error;
pub mod grid;
pub mod harness;
pub mod integrators;
pub mod observables;
pub mod output;
pub mod par;
pub mod regularization;

pub use analytic::{gausson_field, GaussonSpec};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use grid::{DomainSpec, Field};
pub use integrators::{evolve, EvolveConfig, Observers, SplitScheme};
pub use observables::{energy, mass, ErrorNorms};
pub use regularization::{RegKind, Regularization};

/// Crate version recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
