//! Scorer whose rankings are fixed in advance by a truth table over statement
//! texts. Preferred statements score -0.01 per token and everything else
//! -5.0 per token, so under sum reduction a preferred statement beats any
//! dispreferred one of up to 499 times its token count.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::reference::ReferenceTokenizer;
use super::{Backend, BackendIdentity, CausalScorer, MaskedScorer};
use crate::error::BackendError;
use crate::scoring::{MaskQuery, Token};

pub const PREFERRED_LOGPROB: f64 = -0.01;
pub const DISPREFERRED_LOGPROB: f64 = -5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    Preferred,
    Dispreferred,
}

impl Preference {
    fn logprob(self) -> f64 {
        match self {
            Preference::Preferred => PREFERRED_LOGPROB,
            Preference::Dispreferred => DISPREFERRED_LOGPROB,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleScorer {
    tokenizer: ReferenceTokenizer,
    by_text: HashMap<String, Preference>,
    by_ids: HashMap<Vec<u32>, Preference>,
    identity: BackendIdentity,
}

impl OracleScorer {
    pub fn new(truth: impl IntoIterator<Item = (String, Preference)>) -> Self {
        let tokenizer = ReferenceTokenizer::default();
        let by_text: HashMap<String, Preference> = truth.into_iter().collect();
        let mut keys: Vec<(&String, &Preference)> = by_text.iter().collect();
        keys.sort();
        let mut h = Sha256::new();
        for (text, pref) in keys {
            h.update(text.as_bytes());
            h.update([0, *pref as u8]);
        }
        let revision = hex::encode(&h.finalize()[..8]);
        let by_ids = by_text
            .iter()
            .map(|(t, p)| (tokenizer.tokenize(t).iter().map(|t| t.id).collect(), *p))
            .collect();
        OracleScorer {
            tokenizer,
            by_text,
            by_ids,
            identity: BackendIdentity::new("oracle", revision),
        }
    }

    fn lookup(&self, text: &str) -> Result<Preference, BackendError> {
        self.by_text
            .get(text)
            .copied()
            .ok_or_else(|| BackendError::UnknownText(text.to_string()))
    }
}

impl Backend for OracleScorer {
    fn identity(&self) -> &BackendIdentity {
        &self.identity
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        self.lookup(text)?;
        Ok(self.tokenizer.tokenize(text))
    }
}

impl CausalScorer for OracleScorer {
    fn causal_logprobs(&self, text: &str) -> Result<Vec<Option<f64>>, BackendError> {
        let p = self.lookup(text)?;
        Ok(vec![Some(p.logprob()); self.tokenizer.tokenize(text).len()])
    }
}

impl MaskedScorer for OracleScorer {
    fn masked_logprob(&self, token_ids: &[u32], query: &MaskQuery) -> Result<f64, BackendError> {
        query.check(token_ids.len()).map_err(BackendError::Precondition)?;
        self.by_ids
            .get(token_ids)
            .map(|p| p.logprob())
            .ok_or_else(|| BackendError::UnknownText(format!("token ids {token_ids:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preferred_wins_and_unknown_fails() {
        let o = OracleScorer::new([
            ("Paris is in France.".to_string(), Preference::Preferred),
            ("Paris is in Uganda today again.".to_string(), Preference::Dispreferred),
        ]);
        let a: f64 = o.causal_logprobs("Paris is in France.").unwrap().iter().flatten().sum();
        let b: f64 = o
            .causal_logprobs("Paris is in Uganda today again.")
            .unwrap()
            .iter()
            .flatten()
            .sum();
        assert!(a > b);
        assert!(matches!(o.causal_logprobs("nope"), Err(BackendError::UnknownText(_))));
        assert!(o.tokenize("nope").is_err());

        let ids: Vec<u32> = o.tokenize("Paris is in France.").unwrap().iter().map(|t| t.id).collect();
        let q = MaskQuery { masked_positions: vec![0], target_position: 0 };
        assert_eq!(o.masked_logprob(&ids, &q).unwrap(), PREFERRED_LOGPROB);
    }

    #[test]
    fn revision_tracks_truth() {
        let a = OracleScorer::new([("x".to_string(), Preference::Preferred)]);
        let b = OracleScorer::new([("x".to_string(), Preference::Dispreferred)]);
        assert_ne!(a.identity().revision, b.identity().revision);
    }
}
