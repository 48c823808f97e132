//! Conversion from the public release layout: a `metadata_relations.json`
//! object keyed by relation code (`templates`, optional `answer_space_ids`
//! / `answer_space_labels`, optional `cardinality`) next to one
//! `<code>.jsonl` instance table per relation with `sub_id`, `sub_label`,
//! `obj_id` and `obj_label` columns.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use super::{
    Answer, Cardinality, Dataset, DatasetMetadata, Instance, Relation, Template, DEFAULT_ANSWER_CAP,
};
use crate::error::{Error, Result};

pub const RELEASE_METADATA_FILE: &str = "metadata_relations.json";

#[derive(Debug, Deserialize)]
struct ReleaseRelation {
    #[serde(default)]
    templates: Vec<String>,
    #[serde(default)]
    answer_space_ids: Option<Vec<String>>,
    #[serde(default)]
    answer_space_labels: Option<Vec<String>>,
    #[serde(default)]
    cardinality: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ReleaseInstance {
    #[serde(default)]
    sub_id: Option<String>,
    sub_label: String,
    obj_id: String,
    #[serde(default)]
    obj_label: Option<String>,
}

/// Reads a release directory into a [`Dataset`]. Relations are emitted in
/// code order; cardinality comes from the release's metadata when present,
/// otherwise from whether any answer is shared by two instances.
pub fn convert_release(src: impl AsRef<Path>, metadata: DatasetMetadata) -> Result<Dataset> {
    let src = src.as_ref();
    let meta_path = src.join(RELEASE_METADATA_FILE);
    if !meta_path.is_file() {
        return Err(Error::MissingManifest(src.to_path_buf()));
    }
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: BTreeMap<String, ReleaseRelation> =
        serde_json::from_str(&text).map_err(|e| Error::Malformed {
            file: meta_path.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;

    let mut relations = Vec::new();
    for (code, info) in meta {
        let path = src.join(format!("{code}.jsonl"));
        if !path.is_file() {
            log::warn!("relation {code} listed in metadata but {} is missing", path.display());
            continue;
        }
        relations.push(convert_relation(&code, info, &path)?);
    }
    let dataset = Dataset {
        metadata,
        relations,
    };
    dataset.check_references()?;
    Ok(dataset)
}

fn convert_relation(code: &str, info: ReleaseRelation, path: &Path) -> Result<Relation> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: ReleaseInstance = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            file: path.to_path_buf(),
            line: n + 1,
            message: e.to_string(),
        })?;
        rows.push(row);
    }

    let answers: Vec<Answer> = match (info.answer_space_ids, info.answer_space_labels) {
        (Some(ids), Some(labels)) if ids.len() == labels.len() => ids
            .into_iter()
            .zip(labels)
            .map(|(answer_id, label)| Answer { answer_id, label })
            .collect(),
        _ => {
            let mut seen = HashSet::new();
            rows.iter()
                .filter(|r| seen.insert(r.obj_id.clone()))
                .map(|r| Answer {
                    answer_id: r.obj_id.clone(),
                    label: r.obj_label.clone().unwrap_or_default(),
                })
                .collect()
        }
    };

    let mut used_ids = HashSet::new();
    let instances: Vec<Instance> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut id = r.sub_id.clone().unwrap_or_else(|| format!("{code}-{i}"));
            if !used_ids.insert(id.clone()) {
                id = format!("{id}-{i}");
                used_ids.insert(id.clone());
            }
            Instance {
                instance_id: id,
                subject_label: r.sub_label.clone(),
                correct_answer_id: r.obj_id.clone(),
            }
        })
        .collect();

    let cardinality = match info.cardinality.as_deref() {
        Some("single instance per answer") | Some("1:1") | Some("one_to_one") => {
            Cardinality::OneToOne
        }
        Some(_) => Cardinality::NToOne,
        None => {
            let mut seen = HashSet::new();
            if rows.iter().all(|r| seen.insert(r.obj_id.as_str())) {
                Cardinality::OneToOne
            } else {
                Cardinality::NToOne
            }
        }
    };

    Ok(Relation {
        id: code.to_string(),
        cardinality,
        answer_cap: DEFAULT_ANSWER_CAP.max(answers.len()),
        popularity_proxy: None,
        templates: info.templates.into_iter().map(Template::new).collect(),
        answers,
        instances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converts_release_layout() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join(RELEASE_METADATA_FILE),
            r#"{"P36": {"templates": ["The capital of [X] is [Y]."],
                        "answer_space_ids": ["Q1", "Q2"],
                        "answer_space_labels": ["Kampala", "Thimphu"]},
                "P37": {"templates": ["[X] speaks [Y]."]}}"#,
        )
        .unwrap();
        fs::write(
            dir.path().join("P36.jsonl"),
            "{\"sub_id\":\"Q1036\",\"sub_label\":\"Uganda\",\"obj_id\":\"Q1\",\"obj_label\":\"Kampala\"}\n\
             {\"sub_id\":\"Q917\",\"sub_label\":\"Bhutan\",\"obj_id\":\"Q2\",\"obj_label\":\"Thimphu\"}\n",
        )
        .unwrap();
        fs::write(
            dir.path().join("P37.jsonl"),
            "{\"sub_id\":\"a\",\"sub_label\":\"A\",\"obj_id\":\"L\",\"obj_label\":\"Lang\"}\n\
             {\"sub_id\":\"b\",\"sub_label\":\"B\",\"obj_id\":\"L\",\"obj_label\":\"Lang\"}\n",
        )
        .unwrap();
        let d = convert_release(dir.path(), DatasetMetadata::default()).unwrap();
        assert_eq!(d.relations.len(), 2);
        let p36 = d.relation("P36").unwrap();
        assert_eq!(p36.cardinality, Cardinality::OneToOne);
        assert_eq!(p36.answers[1].label, "Thimphu");
        let p37 = d.relation("P37").unwrap();
        assert_eq!(p37.cardinality, Cardinality::NToOne);
        assert_eq!(p37.answers.len(), 1);
    }
}
