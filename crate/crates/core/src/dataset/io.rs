use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    Answer, Cardinality, Dataset, DatasetMetadata, Instance, PopularityProxy, Relation, Template,
    DEFAULT_ANSWER_CAP,
};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(flatten)]
    pub metadata: DatasetMetadata,
    pub relations: Vec<ManifestRelation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRelation {
    pub id: String,
    pub file: String,
    pub cardinality: Cardinality,
    #[serde(default = "default_cap")]
    pub answer_cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub popularity_proxy: Option<PopularityProxy>,
}

fn default_cap() -> usize {
    DEFAULT_ANSWER_CAP
}

/// One line of a relation file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelationRecord {
    Template { index: usize, text: String },
    Answer { answer_id: String, label: String },
    Instance {
        instance_id: String,
        subject_label: String,
        correct_answer_id: String,
    },
}

pub fn load_dataset(root: impl AsRef<Path>) -> Result<Dataset> {
    let root = root.as_ref();
    let manifest_path = root.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(Error::MissingManifest(root.to_path_buf()));
    }
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Malformed {
        file: manifest_path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;

    let mut relations = Vec::with_capacity(manifest.relations.len());
    for entry in &manifest.relations {
        relations.push(load_relation(&root.join(&entry.file), entry)?);
    }
    let dataset = Dataset {
        metadata: manifest.metadata,
        relations,
    };
    dataset.check_references()?;
    Ok(dataset)
}

fn load_relation(path: &Path, entry: &ManifestRelation) -> Result<Relation> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut templates: Vec<(usize, String, usize)> = Vec::new();
    let mut answers = Vec::new();
    let mut instances = Vec::new();

    for (n, line) in BufReader::new(file).lines().enumerate() {
        let lineno = n + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RelationRecord = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            file: path.to_path_buf(),
            line: lineno,
            message: e.to_string(),
        })?;
        match record {
            RelationRecord::Template { index, text } => templates.push((index, text, lineno)),
            RelationRecord::Answer { answer_id, label } => answers.push(Answer { answer_id, label }),
            RelationRecord::Instance {
                instance_id,
                subject_label,
                correct_answer_id,
            } => instances.push(Instance {
                instance_id,
                subject_label,
                correct_answer_id,
            }),
        }
    }

    templates.sort_by_key(|t| t.0);
    for (expected, (index, _, lineno)) in templates.iter().enumerate() {
        if *index != expected {
            return Err(Error::Malformed {
                file: path.to_path_buf(),
                line: *lineno,
                message: format!("template index {index} out of sequence (expected {expected})"),
            });
        }
    }
    if templates.is_empty() {
        return Err(Error::Malformed {
            file: path.to_path_buf(),
            line: 0,
            message: "relation has no templates".into(),
        });
    }

    Ok(Relation {
        id: entry.id.clone(),
        cardinality: entry.cardinality,
        answer_cap: entry.answer_cap,
        popularity_proxy: entry.popularity_proxy,
        templates: templates.into_iter().map(|(_, t, _)| Template::new(t)).collect(),
        answers,
        instances,
    })
}

/// File name a relation is stored under; identifiers are sanitized so that
/// arbitrary ids map onto portable file names.
pub(crate) fn relation_file_name(id: &str) -> String {
    let safe: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{safe}.jsonl")
}

pub fn save_dataset(dataset: &Dataset, root: impl AsRef<Path>) -> Result<()> {
    let root = root.as_ref();
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;

    let mut entries = Vec::with_capacity(dataset.relations.len());
    for relation in &dataset.relations {
        let file = relation_file_name(&relation.id);
        write_relation(&root.join(&file), relation)?;
        entries.push(ManifestRelation {
            id: relation.id.clone(),
            file,
            cardinality: relation.cardinality,
            answer_cap: relation.answer_cap,
            popularity_proxy: relation.popularity_proxy,
        });
    }
    let manifest = Manifest {
        metadata: dataset.metadata.clone(),
        relations: entries,
    };
    let path = root.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn write_relation(path: &PathBuf, relation: &Relation) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let records = relation
        .templates
        .iter()
        .enumerate()
        .map(|(index, t)| RelationRecord::Template {
            index,
            text: t.as_str().to_string(),
        })
        .chain(relation.answers.iter().map(|a| RelationRecord::Answer {
            answer_id: a.answer_id.clone(),
            label: a.label.clone(),
        }))
        .chain(relation.instances.iter().map(|i| RelationRecord::Instance {
            instance_id: i.instance_id.clone(),
            subject_label: i.subject_label.clone(),
            correct_answer_id: i.correct_answer_id.clone(),
        }));
    for record in records {
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
