//! wmlab: a laboratory for spread-spectrum and quantization-based
//! watermarking. It bundles host signal models with maximum-likelihood
//! and moment estimators, embedding rules (additive, multiplicative,
//! magnitude-scaled, host-interference-rejecting, double-sided, and
//! lattice/quantization schemes), matched decision statistics, analytic
//! error/ROC predictors, attack channels, a DCT-domain perceptual model,
//! and a seeded Monte-Carlo harness for verifying predictions by
//! simulation.

pub mod channel;
pub mod detect;
pub mod embed;
pub mod error;
pub mod harness;
pub mod models;
pub mod percept;
pub mod theory;

pub use error::{Error, Result};
pub use models::HostModel;
