use std::sync::atomic::{AtomicUsize, Ordering};

use super::{Backend, BackendIdentity, CausalScorer, MaskedScorer};
use crate::error::BackendError;
use crate::scoring::{MaskQuery, Token};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CallCounts {
    pub tokenize: usize,
    pub causal: usize,
    /// Individual masked queries, whether sent singly or batched.
    pub masked_queries: usize,
}

impl CallCounts {
    pub fn total(&self) -> usize {
        self.tokenize + self.causal + self.masked_queries
    }
}

/// Wraps a scorer and counts the calls that reach it.
#[derive(Debug, Default)]
pub struct CountingScorer<S> {
    inner: S,
    tokenize: AtomicUsize,
    causal: AtomicUsize,
    masked: AtomicUsize,
}

impl<S> CountingScorer<S> {
    pub fn new(inner: S) -> Self {
        CountingScorer {
            inner,
            tokenize: AtomicUsize::new(0),
            causal: AtomicUsize::new(0),
            masked: AtomicUsize::new(0),
        }
    }

    pub fn counts(&self) -> CallCounts {
        CallCounts {
            tokenize: self.tokenize.load(Ordering::SeqCst),
            causal: self.causal.load(Ordering::SeqCst),
            masked_queries: self.masked.load(Ordering::SeqCst),
        }
    }

    pub fn reset(&self) {
        self.tokenize.store(0, Ordering::SeqCst);
        self.causal.store(0, Ordering::SeqCst);
        self.masked.store(0, Ordering::SeqCst);
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }
}

impl<S: Backend> Backend for CountingScorer<S> {
    fn identity(&self) -> &BackendIdentity {
        self.inner.identity()
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        self.tokenize.fetch_add(1, Ordering::SeqCst);
        self.inner.tokenize(text)
    }
}

impl<S: CausalScorer> CausalScorer for CountingScorer<S> {
    fn causal_logprobs(&self, text: &str) -> Result<Vec<Option<f64>>, BackendError> {
        self.causal.fetch_add(1, Ordering::SeqCst);
        self.inner.causal_logprobs(text)
    }
}

impl<S: MaskedScorer> MaskedScorer for CountingScorer<S> {
    fn masked_logprob(&self, token_ids: &[u32], query: &MaskQuery) -> Result<f64, BackendError> {
        self.masked.fetch_add(1, Ordering::SeqCst);
        self.inner.masked_logprob(token_ids, query)
    }

    fn masked_logprobs(&self, token_ids: &[u32], queries: &[MaskQuery]) -> Result<Vec<f64>, BackendError> {
        self.masked.fetch_add(queries.len(), Ordering::SeqCst);
        self.inner.masked_logprobs(token_ids, queries)
    }
}

/// Fails every scoring call once `budget` calls have succeeded. Tokenize
/// calls are not counted. Used to simulate a backend dying mid-run.
#[derive(Debug)]
pub struct FailingScorer<S> {
    inner: S,
    budget: usize,
    used: AtomicUsize,
}

impl<S> FailingScorer<S> {
    pub fn new(inner: S, budget: usize) -> Self {
        FailingScorer {
            inner,
            budget,
            used: AtomicUsize::new(0),
        }
    }

    fn admit(&self) -> Result<(), BackendError> {
        let n = self.used.fetch_add(1, Ordering::SeqCst);
        if n >= self.budget {
            Err(BackendError::Injected(format!("call budget of {} exhausted", self.budget)))
        } else {
            Ok(())
        }
    }
}

impl<S: Backend> Backend for FailingScorer<S> {
    fn identity(&self) -> &BackendIdentity {
        self.inner.identity()
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        self.inner.tokenize(text)
    }
}

impl<S: CausalScorer> CausalScorer for FailingScorer<S> {
    fn causal_logprobs(&self, text: &str) -> Result<Vec<Option<f64>>, BackendError> {
        self.admit()?;
        self.inner.causal_logprobs(text)
    }
}

impl<S: MaskedScorer> MaskedScorer for FailingScorer<S> {
    fn masked_logprob(&self, token_ids: &[u32], query: &MaskQuery) -> Result<f64, BackendError> {
        self.admit()?;
        self.inner.masked_logprob(token_ids, query)
    }
}
