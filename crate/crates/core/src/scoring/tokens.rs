use serde::{Deserialize, Serialize};

use crate::statement::CharSpan;

/// A backend token with character offsets into the statement text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub id: u32,
    pub surface: String,
    pub word_index: usize,
    pub char_start: usize,
    pub char_end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedStatement {
    pub tokens: Vec<Token>,
}

impl TokenizedStatement {
    /// Checks ordering invariants: intervals non-empty, ordered and
    /// non-overlapping, inside `text_chars`, word indices non-decreasing.
    pub fn new(tokens: Vec<Token>, text_chars: usize) -> Result<Self, String> {
        let mut prev_end = 0usize;
        let mut prev_word = 0usize;
        for (i, t) in tokens.iter().enumerate() {
            if t.char_start >= t.char_end {
                return Err(format!("token {i} has empty interval [{}, {})", t.char_start, t.char_end));
            }
            if t.char_start < prev_end {
                return Err(format!("token {i} overlaps or precedes token {}", i.saturating_sub(1)));
            }
            if t.char_end > text_chars {
                return Err(format!("token {i} ends at {} beyond text length {text_chars}", t.char_end));
            }
            if i > 0 && t.word_index < prev_word {
                return Err(format!("token {i} word index decreases"));
            }
            prev_end = t.char_end;
            prev_word = t.word_index;
        }
        Ok(TokenizedStatement { tokens })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn ids(&self) -> Vec<u32> {
        self.tokens.iter().map(|t| t.id).collect()
    }

    /// Positions of tokens overlapping `span`. A token straddling a span
    /// boundary counts as inside.
    pub fn positions_in(&self, span: CharSpan) -> Vec<usize> {
        self.tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| span.intersects(t.char_start, t.char_end))
            .map(|(i, _)| i)
            .collect()
    }
}

/// One masked forward pass: which positions are hidden and which one is
/// scored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaskQuery {
    pub masked_positions: Vec<usize>,
    pub target_position: usize,
}

impl MaskQuery {
    pub fn check(&self, len: usize) -> Result<(), String> {
        if !self.masked_positions.contains(&self.target_position) {
            return Err(format!(
                "target position {} not in masked set {:?}",
                self.target_position, self.masked_positions
            ));
        }
        if let Some(p) = self.masked_positions.iter().find(|&&p| p >= len) {
            return Err(format!("masked position {p} out of range for {len} tokens"));
        }
        Ok(())
    }
}
