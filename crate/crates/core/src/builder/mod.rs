//! Builds balanced probe relations from raw (subject, relation, object)
//! triples.
//!
//! Per relation: drop unlabeled triples, drop unpopular subjects, drop
//! subjects whose label gives their answer away, pick an answer space of
//! well-populated, mutually distinct answers and sample the same number of
//! subjects for each.

mod files;
mod pipeline;

use serde::{Deserialize, Serialize};

use crate::dataset::{normalize_label, Cardinality};

pub use files::{build_from_files, load_relation_specs, load_triples, BuildReport, BUILD_REPORT_FILE};
pub use pipeline::{
    balanced_sample, build_relation, label_outliers, select_answer_space, AnswerPool, AnswerSpace, BuildOutcome,
    Infeasibility, StageCounts,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTriple {
    pub subject_id: String,
    pub subject_label: String,
    pub relation_id: String,
    pub object_id: String,
    pub object_label: String,
    #[serde(default)]
    pub sitelink_count: u64,
    #[serde(default)]
    pub page_views: Option<u64>,
}

/// Per-relation input: how to phrase it and what shape it has.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub cardinality: Cardinality,
    pub templates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuilderConfig {
    pub answer_cap: usize,
    pub per_answer_target: usize,
    /// Reported against the achieved count; the builder itself targets
    /// answers x per_answer_target.
    pub relation_instance_target: usize,
    pub one_to_one_cap: usize,
    /// Applied when every triple of a relation carries page views.
    pub min_page_views: u64,
    /// Applied instead of `min_page_views` when falling back to sitelinks.
    pub min_sitelinks: u64,
    pub leakage_threshold: f64,
    pub min_answers: usize,
}

impl Default for BuilderConfig {
    fn default() -> Self {
        BuilderConfig {
            answer_cap: 25,
            per_answer_target: 6,
            relation_instance_target: 150,
            one_to_one_cap: 60,
            min_page_views: 10_000,
            min_sitelinks: 0,
            leakage_threshold: 0.8,
            min_answers: 5,
        }
    }
}

impl BuilderConfig {
    pub fn check(&self) -> crate::Result<()> {
        let positive = [
            ("answer_cap", self.answer_cap),
            ("per_answer_target", self.per_answer_target),
            ("relation_instance_target", self.relation_instance_target),
            ("one_to_one_cap", self.one_to_one_cap),
            ("min_answers", self.min_answers),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(crate::Error::Config(format!("{name} must be positive")));
        }
        if !(self.leakage_threshold > 0.0 && self.leakage_threshold <= 1.0) {
            return Err(crate::Error::Config(format!(
                "leakage_threshold {} outside (0, 1]",
                self.leakage_threshold
            )));
        }
        Ok(())
    }
}

pub fn filter_unlabeled(triples: Vec<RawTriple>) -> Vec<RawTriple> {
    triples
        .into_iter()
        .filter(|t| !t.subject_label.trim().is_empty() && !t.object_label.trim().is_empty())
        .collect()
}

/// 1 - edit distance / max length (in chars), over normalized labels. The
/// distance is Levenshtein with adjacent transpositions counted as one edit,
/// so "Appel" vs "Apple" is 0.8.
pub fn fuzzy_similarity(a: &str, b: &str) -> f64 {
    similarity(&normalize_label(a), &normalize_label(b))
}

fn similarity(a: &str, b: &str) -> f64 {
    let len = a.chars().count().max(b.chars().count());
    if len == 0 {
        return 1.0;
    }
    1.0 - strsim::osa_distance(a, b) as f64 / len as f64
}

/// The answer leaks through the subject: one of its tokens is a subject
/// token, or the labels are fuzzy-similar at `threshold` or above.
pub fn is_leaky(subject_label: &str, answer_label: &str, threshold: f64) -> bool {
    let subject = normalize_label(subject_label);
    let answer = normalize_label(answer_label);
    let subject_tokens: Vec<&str> = subject.split(' ').collect();
    answer.split(' ').any(|t| subject_tokens.contains(&t))
        || similarity(&subject, &answer) >= threshold
}
