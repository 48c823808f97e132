use super::config::PllStrategy;
use super::tokens::{MaskQuery, TokenizedStatement};

/// One query per token position. `Original` hides only the target;
/// `WithinWordL2r` also hides the rest of the target's word to its right.
/// Word boundaries come from the tokenizer's `word_index`.
pub fn pll_schedule(ts: &TokenizedStatement, strategy: PllStrategy) -> Vec<MaskQuery> {
    let tokens = &ts.tokens;
    (0..tokens.len())
        .map(|i| {
            let masked_positions = match strategy {
                PllStrategy::Original => vec![i],
                PllStrategy::WithinWordL2r => (i..tokens.len())
                    .take_while(|&j| tokens[j].word_index == tokens[i].word_index)
                    .collect(),
            };
            MaskQuery {
                masked_positions,
                target_position: i,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::tokens::Token;
    use proptest::prelude::*;

    fn tokens(words: &[usize]) -> TokenizedStatement {
        TokenizedStatement {
            tokens: words
                .iter()
                .enumerate()
                .map(|(i, &w)| Token {
                    id: i as u32,
                    surface: format!("t{i}"),
                    word_index: w,
                    char_start: 2 * i,
                    char_end: 2 * i + 1,
                })
                .collect(),
        }
    }

    #[test]
    fn souvenir_within_word() {
        // "I bought a nice souvenir ." with souvenir -> so ##uven ##ir at 5..=7
        let ts = tokens(&[0, 1, 2, 3, 4, 4, 4, 5]);
        let q = pll_schedule(&ts, PllStrategy::WithinWordL2r);
        assert_eq!(q[4].masked_positions, vec![4, 5, 6]);
        assert_eq!(q[5].masked_positions, vec![5, 6]);
        assert_eq!(q[6].masked_positions, vec![6]);
        assert_eq!(q[7].masked_positions, vec![7]);
    }

    #[test]
    fn original_masks_singletons() {
        let ts = tokens(&[0, 1, 1, 1]);
        let q = pll_schedule(&ts, PllStrategy::Original);
        let sets: Vec<Vec<usize>> = q.iter().map(|m| m.masked_positions.clone()).collect();
        assert_eq!(sets, vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn single_token() {
        for s in [PllStrategy::Original, PllStrategy::WithinWordL2r] {
            let q = pll_schedule(&tokens(&[0]), s);
            assert_eq!(q, vec![MaskQuery { masked_positions: vec![0], target_position: 0 }]);
        }
    }

    proptest! {
        #[test]
        fn schedules_are_word_suffixes(steps in proptest::collection::vec(0usize..2, 1..40)) {
            let mut words = Vec::new();
            let mut w = 0;
            for (i, s) in steps.iter().enumerate() {
                if i > 0 { w += s; }
                words.push(w);
            }
            let ts = tokens(&words);
            let orig = pll_schedule(&ts, PllStrategy::Original);
            let l2r = pll_schedule(&ts, PllStrategy::WithinWordL2r);
            prop_assert_eq!(orig.len(), words.len());
            prop_assert_eq!(l2r.len(), words.len());
            for (i, q) in l2r.iter().enumerate() {
                prop_assert_eq!(q.target_position, i);
                let expected: Vec<usize> = (i..words.len()).filter(|&j| words[j] == words[i]).collect();
                prop_assert_eq!(&q.masked_positions, &expected);
                let single = words.iter().filter(|&&x| x == words[i]).count() == 1;
                if single {
                    prop_assert_eq!(&q.masked_positions, &orig[i].masked_positions);
                }
            }
        }
    }
}
