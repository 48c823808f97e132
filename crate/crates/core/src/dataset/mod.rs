//! Probe dataset model: relations with templates, a closed answer space and
//! the instances whose correct answer is drawn from it.
//!
//! On disk a dataset is a directory with a `manifest.json` and one
//! line-delimited JSON file per relation; see [`load_dataset`] and
//! [`save_dataset`].

mod convert;
mod io;
mod stats;
mod validate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use convert::convert_release;
pub use io::{load_dataset, save_dataset, Manifest, ManifestRelation, RelationRecord, MANIFEST_FILE};
pub use stats::{answer_space_size_stats, instances_per_answer_mean, AnswerSpaceStats, SizeSummary};
pub use validate::{
    validate_dataset, Finding, RelationValidation, Rule, RuleStatus, Severity, ValidationConfig,
    ValidationReport,
};

pub const SUBJECT_PLACEHOLDER: &str = "[X]";
pub const OBJECT_PLACEHOLDER: &str = "[Y]";
pub const DEFAULT_ANSWER_CAP: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cardinality {
    #[serde(alias = "1:1")]
    OneToOne,
    #[serde(alias = "N:1", alias = "n:1")]
    NToOne,
}

impl Cardinality {
    pub fn as_str(self) -> &'static str {
        match self {
            Cardinality::OneToOne => "1:1",
            Cardinality::NToOne => "N:1",
        }
    }
}

/// Which popularity signal was used when the relation was sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopularityProxy {
    PageViews,
    Sitelinks,
}

/// A sentence pattern with one `[X]` (subject) and one `[Y]` (object) slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Template(String);

/// Byte offsets of the two placeholders inside a valid template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placeholders {
    pub subject: usize,
    pub object: usize,
}

impl Template {
    pub fn new(text: impl Into<String>) -> Self {
        Template(text.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Locates both placeholders, failing unless each occurs exactly once.
    pub fn placeholders(&self) -> Result<Placeholders> {
        let find_one = |needle: &str| -> Result<usize> {
            let hits: Vec<usize> = self.0.match_indices(needle).map(|(i, _)| i).collect();
            match hits.as_slice() {
                [one] => Ok(*one),
                _ => Err(Error::Template {
                    template: self.0.clone(),
                    message: format!("expected exactly one {needle}, found {}", hits.len()),
                }),
            }
        };
        let subject = find_one(SUBJECT_PLACEHOLDER)?;
        let object = find_one(OBJECT_PLACEHOLDER)?;
        Ok(Placeholders { subject, object })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub answer_id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub instance_id: String,
    pub subject_label: String,
    pub correct_answer_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub id: String,
    pub cardinality: Cardinality,
    pub answer_cap: usize,
    pub popularity_proxy: Option<PopularityProxy>,
    pub templates: Vec<Template>,
    pub answers: Vec<Answer>,
    pub instances: Vec<Instance>,
}

impl Relation {
    pub fn answer_index(&self, answer_id: &str) -> Option<usize> {
        self.answers.iter().position(|a| a.answer_id == answer_id)
    }

    pub fn answer(&self, answer_id: &str) -> Option<&Answer> {
        self.answers.iter().find(|a| a.answer_id == answer_id)
    }

    /// Instance counts per answer, in answer-space order.
    pub fn answer_histogram(&self) -> Vec<(String, usize)> {
        let mut counts: Vec<(String, usize)> = self
            .answers
            .iter()
            .map(|a| (a.answer_id.clone(), 0))
            .collect();
        for inst in &self.instances {
            if let Some(i) = self.answer_index(&inst.correct_answer_id) {
                counts[i].1 += 1;
            }
        }
        counts
    }

    /// Checks the cross-reference invariants the loader relies on: unique
    /// answer and instance ids, and every instance resolving into the
    /// answer space.
    pub fn check_references(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for a in &self.answers {
            if !seen.insert(a.answer_id.as_str()) {
                return Err(Error::Dataset(format!(
                    "relation {}: duplicate answer id {}",
                    self.id, a.answer_id
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for inst in &self.instances {
            if !seen.insert(inst.instance_id.as_str()) {
                return Err(Error::Dataset(format!(
                    "relation {}: duplicate instance id {}",
                    self.id, inst.instance_id
                )));
            }
            if self.answer_index(&inst.correct_answer_id).is_none() {
                return Err(Error::Dataset(format!(
                    "relation {}: instance {} references unknown answer id {}",
                    self.id, inst.instance_id, inst.correct_answer_id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub name: String,
    pub version: String,
    #[serde(default)]
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub metadata: DatasetMetadata,
    pub relations: Vec<Relation>,
}

impl Dataset {
    pub fn relation(&self, id: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.id == id)
    }

    pub fn instance_count(&self) -> usize {
        self.relations.iter().map(|r| r.instances.len()).sum()
    }

    pub fn check_references(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for r in &self.relations {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Dataset(format!("duplicate relation id {}", r.id)));
            }
            r.check_references()?;
        }
        Ok(())
    }
}

/// Label normalization used for distinctness checks: trim, collapse internal
/// whitespace, case-fold.
pub fn normalize_label(label: &str) -> String {
    label
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}
