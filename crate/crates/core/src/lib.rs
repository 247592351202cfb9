//! Invariant Bayesian predictive procedures for the multivariate normal
//! family and fixed-lengthscale Gaussian-process regression, together with a
//! reproducible Monte Carlo engine for their Kullback–Leibler predictive risk.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod data;
pub mod error;
pub mod gppredict;
pub mod groups;
pub mod mvnpredict;
pub mod numcore;
pub mod quadrature;
pub mod riskmc;

pub use error::{Error, Result};
