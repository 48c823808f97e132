//! Relational knowledge probing for language models.
//!
//! Each fact is turned into one statement per candidate answer; a scorer
//! backend assigns every statement a (pseudo) log-likelihood and the
//! highest-scoring statement is the model's prediction.

pub mod backends;
pub mod builder;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod run;
pub mod scoring;
pub mod statement;
pub mod synthetic;

pub use error::{BackendError, Error, Result};
