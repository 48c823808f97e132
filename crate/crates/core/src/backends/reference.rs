//! Deterministic in-process scorer for tests and examples.
//!
//! Tokens are whitespace words, further split so that every punctuation
//! character is its own sub-token and long alphanumeric runs are chunked.
//! Each logprob is drawn from a SHA-256 of (seed, token id, context), mapped
//! into [-5, -1].

use sha2::{Digest, Sha256};

use super::{Backend, BackendIdentity, CausalScorer, MaskedScorer};
use crate::error::BackendError;
use crate::scoring::{MaskQuery, Token};

/// Id substituted for masked positions.
pub const MASK_ID: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceTokenizer {
    pub max_piece_chars: usize,
}

impl Default for ReferenceTokenizer {
    fn default() -> Self {
        ReferenceTokenizer { max_piece_chars: 6 }
    }
}

impl ReferenceTokenizer {
    pub fn token_id(surface: &str) -> u32 {
        let d = Sha256::digest(surface.as_bytes());
        // keep MASK_ID free
        u32::from_le_bytes([d[0], d[1], d[2], d[3]]).min(MASK_ID - 1)
    }

    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut word = 0usize;
        let mut i = 0usize;
        while i < chars.len() {
            if chars[i].is_whitespace() {
                i += 1;
                continue;
            }
            let end = (i..chars.len()).find(|&j| chars[j].is_whitespace()).unwrap_or(chars.len());
            let mut p = i;
            while p < end {
                let q = if chars[p].is_alphanumeric() {
                    (p..end)
                        .take(self.max_piece_chars.max(1))
                        .take_while(|&j| chars[j].is_alphanumeric())
                        .last()
                        .unwrap()
                        + 1
                } else {
                    p + 1
                };
                let surface: String = chars[p..q].iter().collect();
                out.push(Token {
                    id: Self::token_id(&surface),
                    surface,
                    word_index: word,
                    char_start: p,
                    char_end: q,
                });
                p = q;
            }
            word += 1;
            i = end;
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceScorer {
    seed: u64,
    tokenizer: ReferenceTokenizer,
    identity: BackendIdentity,
}

impl ReferenceScorer {
    pub fn new(seed: u64) -> Self {
        ReferenceScorer {
            seed,
            tokenizer: ReferenceTokenizer::default(),
            identity: BackendIdentity::new("reference", format!("seed-{seed}")),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn draw(&self, domain: u8, token: u32, context: &[u32], extra: u64) -> f64 {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update([domain]);
        h.update(token.to_le_bytes());
        h.update(extra.to_le_bytes());
        h.update((context.len() as u64).to_le_bytes());
        for id in context {
            h.update(id.to_le_bytes());
        }
        let d = h.finalize();
        let bits = u64::from_le_bytes(d[..8].try_into().unwrap()) >> 11;
        let frac = bits as f64 / (1u64 << 53) as f64;
        -(1.0 + 4.0 * frac)
    }
}

impl Backend for ReferenceScorer {
    fn identity(&self) -> &BackendIdentity {
        &self.identity
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        Ok(self.tokenizer.tokenize(text))
    }
}

impl CausalScorer for ReferenceScorer {
    /// Every position is defined; the first token is conditioned on an
    /// empty prefix.
    fn causal_logprobs(&self, text: &str) -> Result<Vec<Option<f64>>, BackendError> {
        let ids: Vec<u32> = self.tokenizer.tokenize(text).iter().map(|t| t.id).collect();
        Ok((0..ids.len())
            .map(|i| Some(self.draw(b'c', ids[i], &ids[..i], 0)))
            .collect())
    }
}

impl MaskedScorer for ReferenceScorer {
    fn masked_logprob(&self, token_ids: &[u32], query: &MaskQuery) -> Result<f64, BackendError> {
        query.check(token_ids.len()).map_err(BackendError::Precondition)?;
        let mut view = token_ids.to_vec();
        for &p in &query.masked_positions {
            view[p] = MASK_ID;
        }
        Ok(self.draw(b'm', token_ids[query.target_position], &view, query.target_position as u64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(text: &str) -> Vec<(String, usize, usize, usize)> {
        ReferenceTokenizer::default()
            .tokenize(text)
            .into_iter()
            .map(|t| (t.surface, t.word_index, t.char_start, t.char_end))
            .collect()
    }

    #[test]
    fn uganda_is_nice() {
        let s = shape("Uganda is nice.");
        let words: Vec<usize> = s.iter().map(|t| t.1).collect();
        assert_eq!(words, vec![0, 1, 2, 2]);
        assert_eq!(s[3], (".".into(), 2, 14, 15));
    }

    #[test]
    fn long_words_split_into_pieces() {
        let s = shape("a souvenirs");
        let surfaces: Vec<&str> = s.iter().map(|t| t.0.as_str()).collect();
        assert_eq!(surfaces, vec!["a", "souven", "irs"]);
        assert_eq!(s[2].1, 1);
        assert_eq!(shape(""), vec![]);
        assert_eq!(shape("  \t "), vec![]);
    }

    #[test]
    fn offsets_are_char_based() {
        let s = shape("Köln liegt");
        assert_eq!(s[0], ("Köln".into(), 0, 0, 4));
        assert_eq!(s[1], ("liegt".into(), 1, 5, 10));
    }

    #[test]
    fn deterministic_and_bounded() {
        let r = ReferenceScorer::new(7);
        let text = "The capital of Uganda is Kampala.";
        let a = r.causal_logprobs(text).unwrap();
        assert_eq!(a, r.causal_logprobs(text).unwrap());
        assert_eq!(a.len(), r.tokenize(text).unwrap().len());
        for lp in a.iter().flatten() {
            assert!((-5.0..=-1.0).contains(lp));
        }
        let ids: Vec<u32> = r.tokenize(text).unwrap().iter().map(|t| t.id).collect();
        for i in 0..ids.len() {
            let q = MaskQuery { masked_positions: vec![i], target_position: i };
            let lp = r.masked_logprob(&ids, &q).unwrap();
            assert!((-5.0..=-1.0).contains(&lp));
            assert_eq!(lp, r.masked_logprob(&ids, &q).unwrap());
        }
    }

    #[test]
    fn seeds_differ_on_fixture() {
        let text = "The capital of Uganda is Kampala.";
        let a = ReferenceScorer::new(1).causal_logprobs(text).unwrap();
        let b = ReferenceScorer::new(2).causal_logprobs(text).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn masked_view_matters() {
        let r = ReferenceScorer::new(0);
        let ids = [10, 11, 12];
        let one = MaskQuery { masked_positions: vec![1], target_position: 1 };
        let two = MaskQuery { masked_positions: vec![1, 2], target_position: 1 };
        assert_ne!(r.masked_logprob(&ids, &one).unwrap(), r.masked_logprob(&ids, &two).unwrap());
        let bad = MaskQuery { masked_positions: vec![2], target_position: 1 };
        assert!(matches!(r.masked_logprob(&ids, &bad), Err(BackendError::Precondition(_))));
    }
}
