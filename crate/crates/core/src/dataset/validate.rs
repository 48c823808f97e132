use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{normalize_label, Cardinality, Dataset, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Placeholders,
    EmptyLabels,
    DuplicateLabels,
    AnswerCap,
    Balance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RuleStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Largest allowed difference between the most and least frequent answer.
    pub max_balance_spread: usize,
    pub placeholder_severity: Severity,
    pub empty_label_severity: Severity,
    pub duplicate_label_severity: Severity,
    pub answer_cap_severity: Severity,
    pub balance_severity: Severity,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            max_balance_spread: 1,
            placeholder_severity: Severity::Error,
            empty_label_severity: Severity::Error,
            duplicate_label_severity: Severity::Error,
            answer_cap_severity: Severity::Error,
            balance_severity: Severity::Warning,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub rule: Rule,
    pub status: RuleStatus,
    pub severity: Severity,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationValidation {
    pub relation_id: String,
    pub cardinality: Cardinality,
    pub histogram: Vec<(String, usize)>,
    pub spread: usize,
    pub mean_instances_per_answer: f64,
    pub findings: Vec<Finding>,
}

impl RelationValidation {
    pub fn status(&self, rule: Rule) -> Option<RuleStatus> {
        self.findings.iter().find(|f| f.rule == rule).map(|f| f.status)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub relations: Vec<RelationValidation>,
}

impl ValidationReport {
    /// A report passes when no failed rule carries `Error` severity.
    pub fn passed(&self) -> bool {
        self.failures(Severity::Error).next().is_none()
    }

    pub fn failures(&self, at_least: Severity) -> impl Iterator<Item = (&str, &Finding)> {
        self.relations.iter().flat_map(move |r| {
            r.findings
                .iter()
                .filter(move |f| f.status == RuleStatus::Fail && f.severity >= at_least)
                .map(move |f| (r.relation_id.as_str(), f))
        })
    }

    pub fn relation(&self, id: &str) -> Option<&RelationValidation> {
        self.relations.iter().find(|r| r.relation_id == id)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.relations {
            let _ = writeln!(
                out,
                "{} ({}) answers={} spread={} mean/answer={:.3}",
                r.relation_id,
                r.cardinality.as_str(),
                r.histogram.len(),
                r.spread,
                r.mean_instances_per_answer
            );
            for f in &r.findings {
                let status = match f.status {
                    RuleStatus::Pass => "PASS",
                    RuleStatus::Fail => "FAIL",
                };
                let _ = writeln!(out, "  {status} {:?} [{:?}] {}", f.rule, f.severity, f.detail);
            }
        }
        let _ = writeln!(out, "overall: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

pub fn validate_dataset(dataset: &Dataset, cfg: &ValidationConfig) -> ValidationReport {
    ValidationReport {
        relations: dataset.relations.iter().map(|r| validate_relation(r, cfg)).collect(),
    }
}

fn finding(rule: Rule, severity: Severity, problems: Vec<String>, ok: &str) -> Finding {
    if problems.is_empty() {
        Finding {
            rule,
            status: RuleStatus::Pass,
            severity,
            detail: ok.to_string(),
        }
    } else {
        Finding {
            rule,
            status: RuleStatus::Fail,
            severity,
            detail: problems.join("; "),
        }
    }
}

fn validate_relation(relation: &Relation, cfg: &ValidationConfig) -> RelationValidation {
    let histogram = relation.answer_histogram();
    let max = histogram.iter().map(|h| h.1).max().unwrap_or(0);
    let min = histogram.iter().map(|h| h.1).min().unwrap_or(0);
    let spread = max - min;
    let mean = if histogram.is_empty() {
        0.0
    } else {
        relation.instances.len() as f64 / histogram.len() as f64
    };

    let mut findings = Vec::new();

    let placeholder_problems = relation
        .templates
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.placeholders().err().map(|e| format!("template {i}: {e}")))
        .collect();
    findings.push(finding(
        Rule::Placeholders,
        cfg.placeholder_severity,
        placeholder_problems,
        "all templates have one [X] and one [Y]",
    ));

    let mut empty = Vec::new();
    for a in &relation.answers {
        if a.label.trim().is_empty() {
            empty.push(format!("answer {} has an empty label", a.answer_id));
        }
    }
    for i in &relation.instances {
        if i.subject_label.trim().is_empty() {
            empty.push(format!("instance {} has an empty subject label", i.instance_id));
        }
    }
    findings.push(finding(
        Rule::EmptyLabels,
        cfg.empty_label_severity,
        empty,
        "all labels non-empty",
    ));

    let mut by_label: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for a in &relation.answers {
        by_label
            .entry(normalize_label(&a.label))
            .or_default()
            .push(a.answer_id.as_str());
    }
    let duplicates = by_label
        .iter()
        .filter(|(_, ids)| ids.len() > 1)
        .map(|(label, ids)| format!("{label:?} shared by {}", ids.join(", ")))
        .collect();
    findings.push(finding(
        Rule::DuplicateLabels,
        cfg.duplicate_label_severity,
        duplicates,
        "answer labels distinct",
    ));

    if relation.cardinality == Cardinality::NToOne {
        let over = if relation.answers.len() > relation.answer_cap {
            vec![format!(
                "{} answers exceed cap {}",
                relation.answers.len(),
                relation.answer_cap
            )]
        } else {
            Vec::new()
        };
        findings.push(finding(
            Rule::AnswerCap,
            cfg.answer_cap_severity,
            over,
            "answer space within cap",
        ));
    }

    let imbalance = if spread > cfg.max_balance_spread {
        vec![format!(
            "spread {spread} (max {max}, min {min}) exceeds {}",
            cfg.max_balance_spread
        )]
    } else {
        Vec::new()
    };
    findings.push(finding(
        Rule::Balance,
        cfg.balance_severity,
        imbalance,
        &format!("spread {spread}"),
    ));

    RelationValidation {
        relation_id: relation.id.clone(),
        cardinality: relation.cardinality,
        histogram,
        spread,
        mean_instances_per_answer: mean,
        findings,
    }
}
