//! Numerical kernels: symmetric matrices with Cholesky-based factorizations,
//! special functions, random-variate generation and reproducible RNG streams.
//!
//! Every matrix in the model is symmetric positive definite by construction,
//! so all factorizations are Cholesky; there is no general LU path. A failed
//! factorization surfaces as [`Error::NotPositiveDefinite`] and is never
//! papered over by regularization.

mod matrix;
mod rng;
mod sample;
mod special;

pub use matrix::SymMatrix;
pub use rng::{RngStream, StreamKind};
pub use sample::{logdensity_mvn, sample_mvn, sample_wishart};
pub use special::{log_multigamma, logsumexp};

#[allow(unused_imports)]
use crate::error::Error;
