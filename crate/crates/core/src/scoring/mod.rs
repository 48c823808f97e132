//! Statement scoring: causal log-likelihood or masked-LM pseudo
//! log-likelihood, reduced by sum or mean over either the whole statement or
//! the answer tokens only.
//!
//! Conventions:
//! - an undefined causal logprob (usually the first token) is not scored: it
//!   adds nothing to a sum and is left out of a mean's denominator;
//! - a token straddling the answer span boundary belongs to the answer;
//! - in masked mode with answer-only scope, only answer-token positions are
//!   queried, each against the same full-sentence masking schedule.

mod config;
mod schedule;
mod tokens;

use serde::{Deserialize, Serialize};

pub use config::{Mode, PllStrategy, Reduction, ScoringConfig, Scope};
pub use schedule::pll_schedule;
pub use tokens::{MaskQuery, Token, TokenizedStatement};

use crate::backends::{Backend, CausalScorer, MaskedScorer, ScorerRef};
use crate::dataset::{Instance, Relation};
use crate::error::{BackendError, Error, Result};
use crate::statement::{enumerate_statements, Statement};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub statement: Statement,
    /// Token positions that contributed, ascending.
    pub positions: Vec<usize>,
    /// Natural-log probabilities for `positions`, same order.
    pub per_token_logprobs: Vec<f64>,
    pub score: f64,
    pub config: ScoringConfig,
}

pub fn reduce(logprobs: &[f64], reduction: Reduction) -> Result<f64> {
    if logprobs.is_empty() {
        return Err(Error::NoScopedTokens);
    }
    let sum: f64 = logprobs.iter().sum();
    Ok(match reduction {
        Reduction::Sum => sum,
        Reduction::Mean => sum / logprobs.len() as f64,
    })
}

/// Orders (position, logprob) pairs by position before reducing, so the
/// score does not depend on the order in which results arrived.
pub fn assemble(
    mut scored: Vec<(usize, f64)>,
    reduction: Reduction,
) -> Result<(Vec<usize>, Vec<f64>, f64)> {
    scored.sort_by_key(|p| p.0);
    let (positions, logprobs): (Vec<usize>, Vec<f64>) = scored.into_iter().unzip();
    let score = reduce(&logprobs, reduction)?;
    Ok((positions, logprobs, score))
}

fn tokenize(backend: &dyn Backend, text: &str) -> Result<TokenizedStatement> {
    let tokens = backend.tokenize(text)?;
    TokenizedStatement::new(tokens, text.chars().count())
        .map_err(|m| Error::Backend(BackendError::Protocol(m)))
}

fn scoped_positions(ts: &TokenizedStatement, st: &Statement, scope: Scope) -> Vec<usize> {
    match scope {
        Scope::Full => (0..ts.len()).collect(),
        Scope::AnswerOnly => ts.positions_in(st.answer_span),
    }
}

fn attach(st: &Statement, err: Error) -> Error {
    Error::Scoring {
        instance_id: st.instance_id.clone(),
        answer_id: st.answer_id.clone(),
        statement: st.text.clone(),
        source: Box::new(err),
    }
}

pub fn score_causal(st: &Statement, backend: &dyn CausalScorer, cfg: &ScoringConfig) -> Result<ScoreRecord> {
    if cfg.mode != Mode::Causal {
        return Err(Error::Config(format!("score_causal called with {cfg}")));
    }
    let run = || -> Result<ScoreRecord> {
        let ts = tokenize(backend, &st.text)?;
        let logprobs = backend.causal_logprobs(&st.text)?;
        if logprobs.len() != ts.len() {
            return Err(BackendError::Protocol(format!(
                "{} logprobs for {} tokens",
                logprobs.len(),
                ts.len()
            ))
            .into());
        }
        let scored = scoped_positions(&ts, st, cfg.scope)
            .into_iter()
            .filter_map(|p| logprobs[p].map(|lp| (p, lp)))
            .collect();
        let (positions, per_token_logprobs, score) = assemble(scored, cfg.reduction)?;
        Ok(ScoreRecord {
            statement: st.clone(),
            positions,
            per_token_logprobs,
            score,
            config: *cfg,
        })
    };
    run().map_err(|e| attach(st, e))
}

pub fn score_masked(st: &Statement, backend: &dyn MaskedScorer, cfg: &ScoringConfig) -> Result<ScoreRecord> {
    let strategy = cfg
        .pll_strategy()
        .ok_or_else(|| Error::Config(format!("score_masked called with {cfg}")))?;
    let run = || -> Result<ScoreRecord> {
        let ts = tokenize(backend, &st.text)?;
        if ts.is_empty() {
            return Err(Error::NoScopedTokens);
        }
        let schedule = pll_schedule(&ts, strategy);
        let queries: Vec<MaskQuery> = scoped_positions(&ts, st, cfg.scope)
            .into_iter()
            .map(|p| schedule[p].clone())
            .collect();
        let ids = ts.ids();
        let results = backend.masked_logprobs(&ids, &queries)?;
        if results.len() != queries.len() {
            return Err(BackendError::Protocol(format!(
                "{} results for {} masked queries",
                results.len(),
                queries.len()
            ))
            .into());
        }
        let scored = queries.iter().map(|q| q.target_position).zip(results).collect();
        let (positions, per_token_logprobs, score) = assemble(scored, cfg.reduction)?;
        Ok(ScoreRecord {
            statement: st.clone(),
            positions,
            per_token_logprobs,
            score,
            config: *cfg,
        })
    };
    run().map_err(|e| attach(st, e))
}

pub fn score_statement(st: &Statement, scorer: ScorerRef<'_>, cfg: &ScoringConfig) -> Result<ScoreRecord> {
    match (scorer, cfg.mode) {
        (ScorerRef::Causal(b), Mode::Causal) => score_causal(st, b, cfg),
        (ScorerRef::Masked(b), Mode::Masked { .. }) => score_masked(st, b, cfg),
        (ScorerRef::Causal(_), _) => Err(Error::Config(format!("{cfg} needs a masked scorer"))),
        (ScorerRef::Masked(_), _) => Err(Error::Config(format!("{cfg} needs a causal scorer"))),
    }
}

/// Scores every answer option of one instance under one template. Any
/// failing statement fails the whole instance.
pub fn score_instance(
    instance: &Instance,
    relation: &Relation,
    template_index: usize,
    scorer: ScorerRef<'_>,
    cfg: &ScoringConfig,
) -> Result<Vec<ScoreRecord>> {
    enumerate_statements(instance, relation, template_index)?
        .iter()
        .map(|st| score_statement(st, scorer, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{BackendIdentity, CountingScorer, ReferenceScorer};
    use crate::dataset::{Answer, Cardinality, Template};
    use crate::statement::instantiate;
    use proptest::prelude::*;

    /// Whitespace tokens with fixed causal logprobs.
    struct Fixed {
        id: BackendIdentity,
        logprobs: Vec<Option<f64>>,
        masked: f64,
    }

    impl Fixed {
        fn new(logprobs: Vec<Option<f64>>) -> Self {
            Fixed {
                id: BackendIdentity::new("fixed", "1"),
                logprobs,
                masked: -0.5,
            }
        }
    }

    fn whitespace_tokens(text: &str) -> Vec<Token> {
        let mut out = Vec::new();
        let mut start = None;
        let chars: Vec<char> = text.chars().collect();
        for i in 0..=chars.len() {
            let ws = i == chars.len() || chars[i].is_whitespace();
            match (start, ws) {
                (None, false) => start = Some(i),
                (Some(s), true) => {
                    out.push(Token {
                        id: out.len() as u32,
                        surface: chars[s..i].iter().collect(),
                        word_index: out.len(),
                        char_start: s,
                        char_end: i,
                    });
                    start = None;
                }
                _ => {}
            }
        }
        out
    }

    impl Backend for Fixed {
        fn identity(&self) -> &BackendIdentity {
            &self.id
        }
        fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
            Ok(whitespace_tokens(text))
        }
    }

    impl CausalScorer for Fixed {
        fn causal_logprobs(&self, _text: &str) -> Result<Vec<Option<f64>>, BackendError> {
            Ok(self.logprobs.clone())
        }
    }

    impl MaskedScorer for Fixed {
        fn masked_logprob(&self, _ids: &[u32], q: &MaskQuery) -> Result<f64, BackendError> {
            q.check(usize::MAX).map_err(BackendError::Precondition)?;
            Ok(self.masked)
        }
    }

    fn three_word() -> Statement {
        instantiate(&Template::new("[X] is [Y]"), "Alpha", "Beta").unwrap()
    }

    #[test]
    fn causal_sum_and_mean() {
        let b = Fixed::new(vec![Some(-1.0), Some(-2.0), Some(-3.0)]);
        let st = three_word();
        let sum = score_causal(&st, &b, &ScoringConfig::causal()).unwrap();
        assert_eq!(sum.score, -6.0);
        let mean = score_causal(&st, &b, &ScoringConfig::causal().with_reduction(Reduction::Mean)).unwrap();
        assert_eq!(mean.score, -2.0);
        let ans = score_causal(&st, &b, &ScoringConfig::causal().with_scope(Scope::AnswerOnly)).unwrap();
        assert_eq!(ans.positions, vec![2]);
        assert_eq!(ans.score, -3.0);
    }

    #[test]
    fn undefined_first_token_is_skipped() {
        let b = Fixed::new(vec![None, Some(-2.0), Some(-4.0)]);
        let st = three_word();
        let sum = score_causal(&st, &b, &ScoringConfig::causal()).unwrap();
        assert_eq!(sum.score, -6.0);
        assert_eq!(sum.positions, vec![1, 2]);
        let mean = score_causal(&st, &b, &ScoringConfig::causal().with_reduction(Reduction::Mean)).unwrap();
        assert_eq!(mean.score, -3.0);

        // a sentence-initial single-token answer has nothing left to score
        let st = instantiate(&Template::new("[Y] is [X]"), "Alpha", "Beta").unwrap();
        let err = score_causal(&st, &b, &ScoringConfig::causal().with_scope(Scope::AnswerOnly)).unwrap_err();
        assert!(err.to_string().contains("no scoped tokens"), "{err}");
    }

    #[test]
    fn length_mismatch_is_protocol_error_with_identity() {
        let b = Fixed::new(vec![Some(-1.0)]);
        let mut st = three_word();
        st.instance_id = "Q42".into();
        st.answer_id = "A7".into();
        let err = score_causal(&st, &b, &ScoringConfig::causal()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Q42") && msg.contains("A7") && msg.contains("protocol"), "{msg}");
        assert!(err.is_backend());
    }

    #[test]
    fn answer_only_equals_full_minus_context() {
        let b = Fixed::new(vec![Some(-0.7), Some(-1.9), Some(-2.3)]);
        let st = three_word();
        let full = score_causal(&st, &b, &ScoringConfig::causal()).unwrap();
        let ans = score_causal(&st, &b, &ScoringConfig::causal().with_scope(Scope::AnswerOnly)).unwrap();
        let context: f64 = full
            .positions
            .iter()
            .zip(&full.per_token_logprobs)
            .filter(|(p, _)| !ans.positions.contains(p))
            .map(|(_, lp)| lp)
            .sum();
        assert!((ans.score - (full.score - context)).abs() < 1e-12);
    }

    #[test]
    fn masked_query_counts() {
        let b = CountingScorer::new(Fixed::new(vec![]));
        let st = instantiate(&Template::new("a b c [X] d [Y] e"), "s", "t").unwrap();
        let cfg = ScoringConfig::masked(PllStrategy::WithinWordL2r);
        let rec = score_masked(&st, &b, &cfg).unwrap();
        assert_eq!(b.counts().masked_queries, 7);
        assert_eq!(rec.score, -3.5);

        let b = CountingScorer::new(Fixed::new(vec![]));
        let st = instantiate(&Template::new("a b c [X] [Y] e"), "s", "two words").unwrap();
        let rec = score_masked(&st, &b, &cfg.with_scope(Scope::AnswerOnly)).unwrap();
        assert_eq!(rec.positions, vec![4, 5]);
        assert_eq!(b.counts().masked_queries, 2);
    }

    #[test]
    fn mode_mismatch_is_config_error() {
        let b = Fixed::new(vec![]);
        let st = three_word();
        let cfg = ScoringConfig::masked(PllStrategy::Original);
        assert!(matches!(
            score_statement(&st, ScorerRef::Causal(&b), &cfg),
            Err(Error::Config(_))
        ));
        assert!(matches!(score_causal(&st, &b, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&[-6.0], Reduction::Sum).unwrap(), -6.0);
        assert_eq!(reduce(&[-1.0, -2.0, -3.0], Reduction::Mean).unwrap(), -2.0);
        assert!(matches!(reduce(&[], Reduction::Sum), Err(Error::NoScopedTokens)));
    }

    #[test]
    fn sum_and_mean_disagree_on_crafted_pair() {
        // hand-computed: A = -2.5 under both; B sums to -4.1, averages to -1.3667
        let a = [-2.5];
        let b = [-3.0, -1.0, -0.1];
        let (sa, sb) = (reduce(&a, Reduction::Sum).unwrap(), reduce(&b, Reduction::Sum).unwrap());
        let (ma, mb) = (reduce(&a, Reduction::Mean).unwrap(), reduce(&b, Reduction::Mean).unwrap());
        assert!((sb - -4.1).abs() < 1e-12 && (mb - -4.1 / 3.0).abs() < 1e-12);
        assert!(sa > sb, "sum prefers A");
        assert!(mb > ma, "mean prefers B");
    }

    fn relation(k: usize) -> Relation {
        Relation {
            id: "R".into(),
            cardinality: Cardinality::NToOne,
            answer_cap: 25,
            popularity_proxy: None,
            templates: vec![Template::new("The capital of [X] is [Y].")],
            answers: (0..k)
                .map(|i| Answer {
                    answer_id: format!("a{i}"),
                    label: format!("City Number{i}"),
                })
                .collect(),
            instances: vec![Instance {
                instance_id: "i0".into(),
                subject_label: "Uganda".into(),
                correct_answer_id: "a0".into(),
            }],
        }
    }

    #[test]
    fn instance_query_total_matches_token_counts() {
        let r = relation(25);
        let reference = ReferenceScorer::new(3);
        let counted = CountingScorer::new(&reference);
        let cfg = ScoringConfig::masked(PllStrategy::WithinWordL2r);
        let records = score_instance(&r.instances[0], &r, 0, ScorerRef::Masked(&counted), &cfg).unwrap();
        assert_eq!(records.len(), 25);
        let expected: usize = enumerate_statements(&r.instances[0], &r, 0)
            .unwrap()
            .iter()
            .map(|s| reference.tokenize(&s.text).unwrap().len())
            .sum();
        assert_eq!(counted.counts().masked_queries, expected);
        assert!(records.iter().enumerate().all(|(i, r)| r.statement.answer_id == format!("a{i}")));
    }

    proptest! {
        #[test]
        fn arrival_order_does_not_change_score(
            lps in proptest::collection::vec(-20.0f64..0.0, 1..30),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let pairs: Vec<(usize, f64)> = lps.iter().copied().enumerate().collect();
            let mut shuffled = pairs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = assemble(pairs, Reduction::Sum).unwrap();
            let b = assemble(shuffled, Reduction::Sum).unwrap();
            prop_assert_eq!(a.2.to_bits(), b.2.to_bits());
            prop_assert_eq!(a.0, b.0);
        }
    }
}
