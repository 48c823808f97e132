//! Scorer capabilities consumed by the engine, plus the implementations
//! shipped with the crate: a remote wire-protocol client, a deterministic
//! reference scorer, an oracle scorer, a persistent cache and a call counter.
//!
//! Every capability method returns natural-log probabilities; backends that
//! speak another base convert at the boundary.

mod cache;
mod counting;
mod oracle;
mod reference;
pub mod remote;
pub mod server;

use serde::{Deserialize, Serialize};

use crate::error::BackendError;
use crate::scoring::{MaskQuery, Token};

pub use cache::{CacheEntry, CacheStore, CacheValue, CachedScorer, PayloadKind};
pub use counting::{CallCounts, CountingScorer, FailingScorer};
pub use oracle::{OracleScorer, Preference};
pub use reference::{ReferenceScorer, ReferenceTokenizer};
pub use remote::{ClientOptions, RemoteClient, RetryPolicy};
pub use server::{FullScorer, ProtocolServer, ServerOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    Natural,
    Base2,
    Base10,
}

impl LogBase {
    pub fn ln_base(self) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Base2 => std::f64::consts::LN_2,
            LogBase::Base10 => std::f64::consts::LN_10,
        }
    }

    pub fn to_natural(self, value: f64) -> f64 {
        match self {
            LogBase::Natural => value,
            _ => value * self.ln_base(),
        }
    }

    pub fn from_natural(self, value: f64) -> f64 {
        match self {
            LogBase::Natural => value,
            _ => value / self.ln_base(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BackendIdentity {
    pub name: String,
    pub revision: String,
    pub logprob_base: LogBase,
}

impl BackendIdentity {
    pub fn new(name: impl Into<String>, revision: impl Into<String>) -> Self {
        BackendIdentity {
            name: name.into(),
            revision: revision.into(),
            logprob_base: LogBase::Natural,
        }
    }
}

pub trait Backend: Send + Sync {
    fn identity(&self) -> &BackendIdentity;

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError>;
}

pub trait CausalScorer: Backend {
    /// Per-token log-probabilities aligned with [`Backend::tokenize`]. An
    /// entry is `None` where the backend cannot score it (typically the
    /// first token).
    fn causal_logprobs(&self, text: &str) -> Result<Vec<Option<f64>>, BackendError>;
}

pub trait MaskedScorer: Backend {
    fn masked_logprob(&self, token_ids: &[u32], query: &MaskQuery) -> Result<f64, BackendError>;

    /// Scores several masked views of the same token sequence. Results are in
    /// query order.
    fn masked_logprobs(
        &self,
        token_ids: &[u32],
        queries: &[MaskQuery],
    ) -> Result<Vec<f64>, BackendError> {
        queries
            .iter()
            .map(|q| self.masked_logprob(token_ids, q))
            .collect()
    }
}

impl<T: Backend + ?Sized> Backend for &T {
    fn identity(&self) -> &BackendIdentity {
        (**self).identity()
    }
    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        (**self).tokenize(text)
    }
}

impl<T: CausalScorer + ?Sized> CausalScorer for &T {
    fn causal_logprobs(&self, text: &str) -> Result<Vec<Option<f64>>, BackendError> {
        (**self).causal_logprobs(text)
    }
}

impl<T: MaskedScorer + ?Sized> MaskedScorer for &T {
    fn masked_logprob(&self, token_ids: &[u32], query: &MaskQuery) -> Result<f64, BackendError> {
        (**self).masked_logprob(token_ids, query)
    }
    fn masked_logprobs(&self, token_ids: &[u32], queries: &[MaskQuery]) -> Result<Vec<f64>, BackendError> {
        (**self).masked_logprobs(token_ids, queries)
    }
}

impl<T: Backend + ?Sized> Backend for std::sync::Arc<T> {
    fn identity(&self) -> &BackendIdentity {
        (**self).identity()
    }
    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        (**self).tokenize(text)
    }
}

impl<T: CausalScorer + ?Sized> CausalScorer for std::sync::Arc<T> {
    fn causal_logprobs(&self, text: &str) -> Result<Vec<Option<f64>>, BackendError> {
        (**self).causal_logprobs(text)
    }
}

impl<T: MaskedScorer + ?Sized> MaskedScorer for std::sync::Arc<T> {
    fn masked_logprob(&self, token_ids: &[u32], query: &MaskQuery) -> Result<f64, BackendError> {
        (**self).masked_logprob(token_ids, query)
    }
    fn masked_logprobs(&self, token_ids: &[u32], queries: &[MaskQuery]) -> Result<Vec<f64>, BackendError> {
        (**self).masked_logprobs(token_ids, queries)
    }
}

/// A backend viewed through the capability a scoring mode needs.
#[derive(Clone, Copy)]
pub enum ScorerRef<'a> {
    Causal(&'a dyn CausalScorer),
    Masked(&'a dyn MaskedScorer),
}

impl<'a> ScorerRef<'a> {
    pub fn identity(&self) -> &'a BackendIdentity {
        match *self {
            ScorerRef::Causal(s) => s.identity(),
            ScorerRef::Masked(s) => s.identity(),
        }
    }
}
