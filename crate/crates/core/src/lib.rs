//! Bayesian inference for ordinal (Likert) survey data.
//!
//! Two complementary model families are provided over the same survey data
//! model:
//!
//! * [`mrf`]: an ordinal Markov random field over items and respondent
//!   characteristics, with spike-and-slab edge selection sampled on the
//!   pseudoposterior, posterior inclusion probabilities and inclusion Bayes
//!   factors.
//! * [`grm`]: a Bayesian graded response model whose latent traits are
//!   regressed on covariates, fitted by multi-chain Metropolis-within-Gibbs
//!   with Gelman-Rubin diagnostics.
//!
//! [`survey`] handles ingestion and cleaning, [`explore`] the descriptive
//! layer (Mood's median test, Likert distribution tables) and [`simulate`]
//! the synthetic-data generators and brute-force oracles used for
//! verification. The [`cli`] module wires everything into the
//! `ordinal-bayes` binary.

pub mod cli;
pub mod error;
pub mod explore;
pub mod grm;
pub mod mcmc;
pub mod mrf;
pub mod output;
pub mod rng;
pub mod simulate;
pub mod survey;

pub use error::{Error, ErrorKind, Result};
pub use mcmc::McmcConfig;
pub use survey::{Codebook, OrdinalMatrix, SurveyDataset};
