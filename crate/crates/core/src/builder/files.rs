//! File-level driver: triples JSONL plus a relation spec file in, a dataset
//! directory plus `build_report.json` out.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_relation, BuildOutcome, BuilderConfig, RawTriple, RelationSpec, StageCounts};
use crate::dataset::{save_dataset, validate_dataset, Cardinality, Dataset, DatasetMetadata, PopularityProxy, ValidationConfig};
use crate::error::{Error, Result};

pub const BUILD_REPORT_FILE: &str = "build_report.json";

pub fn load_triples(path: impl AsRef<Path>) -> Result<Vec<RawTriple>> {
    let path = path.as_ref();
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: RawTriple = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            file: path.to_path_buf(),
            line: n + 1,
            message: e.to_string(),
        })?;
        if t.subject_id.is_empty() || t.object_id.is_empty() || t.relation_id.is_empty() {
            return Err(Error::Malformed {
                file: path.to_path_buf(),
                line: n + 1,
                message: "empty id".into(),
            });
        }
        out.push(t);
    }
    Ok(out)
}

/// A JSON object mapping relation id to `{cardinality, templates}`.
pub fn load_relation_specs(path: impl AsRef<Path>) -> Result<BTreeMap<String, RelationSpec>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed {
        file: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierEntry {
    pub answer_id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationBuildReport {
    pub relation_id: String,
    pub cardinality: Cardinality,
    pub built: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub popularity_proxy: Option<PopularityProxy>,
    pub answers: usize,
    pub instances: usize,
    /// answers x per-answer count, which the builder always meets.
    pub instance_target: usize,
    /// The nominal per-relation size from the config.
    pub configured_target: usize,
    pub counts: StageCounts,
    pub outliers: Vec<OutlierEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub dataset: DatasetMetadata,
    pub seed: u64,
    pub config: BuilderConfig,
    pub relations: Vec<RelationBuildReport>,
    /// Relation ids present in the triples but missing from the relations file.
    pub unspecified: Vec<String>,
    pub validation_passed: bool,
}

impl BuildReport {
    pub fn built(&self) -> impl Iterator<Item = &RelationBuildReport> {
        self.relations.iter().filter(|r| r.built)
    }

    pub fn infeasible(&self) -> impl Iterator<Item = &RelationBuildReport> {
        self.relations.iter().filter(|r| !r.built)
    }
}

/// Builds every specified relation (in parallel, output in id order),
/// writes the dataset to `out` and the report next to it.
pub fn build_from_files(
    triples_path: impl AsRef<Path>,
    specs_path: impl AsRef<Path>,
    metadata: DatasetMetadata,
    cfg: &BuilderConfig,
    seed: u64,
    out: impl AsRef<Path>,
) -> Result<(Dataset, BuildReport)> {
    cfg.check()?;
    let triples = load_triples(triples_path)?;
    let specs = load_relation_specs(specs_path)?;
    let mut grouped: BTreeMap<&str, Vec<RawTriple>> = BTreeMap::new();
    for t in &triples {
        grouped.entry(t.relation_id.as_str()).or_default().push(t.clone());
    }
    let unspecified: Vec<String> = grouped
        .keys()
        .filter(|k| !specs.contains_key(**k))
        .map(|k| k.to_string())
        .collect();

    let outcomes: Vec<(String, &RelationSpec, BuildOutcome)> = specs
        .par_iter()
        .map(|(id, spec)| {
            let rel_triples = grouped.get(id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
            (id.clone(), spec, build_relation(id, rel_triples, spec, cfg, seed))
        })
        .collect();

    let mut relations = Vec::new();
    let mut reports = Vec::new();
    for (id, spec, outcome) in outcomes {
        let per_answer = match spec.cardinality {
            Cardinality::NToOne => cfg.per_answer_target,
            Cardinality::OneToOne => 1,
        };
        let configured_target = match spec.cardinality {
            Cardinality::NToOne => cfg.relation_instance_target,
            Cardinality::OneToOne => cfg.one_to_one_cap,
        };
        match outcome {
            BuildOutcome::Built {
                relation,
                counts,
                outliers,
            } => {
                reports.push(RelationBuildReport {
                    relation_id: id,
                    cardinality: spec.cardinality,
                    built: true,
                    reason: None,
                    popularity_proxy: relation.popularity_proxy,
                    answers: relation.answers.len(),
                    instances: relation.instances.len(),
                    instance_target: relation.answers.len() * per_answer,
                    configured_target,
                    counts,
                    outliers: outliers
                        .iter()
                        .map(|a| OutlierEntry {
                            answer_id: a.clone(),
                            label: relation.answer(a).map(|x| x.label.clone()).unwrap_or_default(),
                        })
                        .collect(),
                });
                relations.push(relation);
            }
            BuildOutcome::Infeasible { reason, counts, .. } => reports.push(RelationBuildReport {
                relation_id: id,
                cardinality: spec.cardinality,
                built: false,
                reason: Some(reason.reason()),
                popularity_proxy: None,
                answers: 0,
                instances: 0,
                instance_target: 0,
                configured_target,
                counts,
                outliers: Vec::new(),
            }),
        }
    }

    let dataset = Dataset { metadata, relations };
    let validation = validate_dataset(&dataset, &ValidationConfig::default());
    let out = out.as_ref();
    save_dataset(&dataset, out)?;
    let report = BuildReport {
        dataset: dataset.metadata.clone(),
        seed,
        config: cfg.clone(),
        relations: reports,
        unspecified,
        validation_passed: validation.passed(),
    };
    let path = out.join(BUILD_REPORT_FILE);
    fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| Error::io(&path, e))?;
    Ok((dataset, report))
}
