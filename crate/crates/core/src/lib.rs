//! Numerical laboratory for the critical two-dimensional stochastic heat flow:
//! the delta-Bose semigroup and `j^θ`, finite-dimensional conditional Gaussian
//! multiplicative chaos over weighted path ensembles, interval couplings and the θ-flow.

pub mod cli;
pub mod coupling;
pub mod error;
pub mod experiments;
pub mod gmc;
pub mod delta_bose;
pub mod paths;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
