//! Bayesian structure learning for mixtures of Gaussian Bayesian networks.
//!
//! The crate scores directed acyclic graphs against multivariate data under
//! three marginal-likelihood models, all with Normal–Wishart priors:
//!
//! * **H** — a homogeneous Gaussian Bayesian network (single component),
//! * **M1** — a full-covariance mixture in which every component carries its
//!   own covariance matrix, so the score factorizes over components,
//! * **M2** — a tied-covariance mixture in which all components share one
//!   covariance matrix; the shared Wishart posterior couples the components
//!   and the score no longer factorizes.
//!
//! On top of the scores sits a joint MCMC sampler ([`mcmc`]) that alternates
//! Metropolis–Hastings moves in DAG space with collapsed Gibbs reallocation
//! moves over latent component assignments, plus a data simulator
//! ([`simulate`]), posterior parameter draws and predictive densities
//! ([`posterior`]), and network-recovery metrics ([`evaluate`]).
//!
//! The `examples/` directory contains one runnable example per capability;
//! the `mixgbn` binary wires the same pieces into a small pipeline CLI
//! (`simulate`, `sample`, `evaluate`, `predict`).

pub mod allocation;
pub mod cli;
pub mod data;
pub mod error;
pub mod evaluate;
pub mod graph;
pub mod mcmc;
pub mod numkern;
pub mod posterior;
pub mod scoring;
pub mod simulate;

pub use data::Dataset;
pub use error::Error;
pub use graph::{Cpdag, Dag};
pub use scoring::{Hyperparameters, Model};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
