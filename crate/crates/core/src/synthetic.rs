//! Deterministic synthetic datasets, raw triples and oracle truth tables for
//! examples, benchmarks and tests.
//!
//! Labels are pronounceable nonsense words. Subject words and answer words
//! come from disjoint syllable sets, so no subject shares a token with an
//! answer.

use std::collections::BTreeMap;

use crate::backends::Preference;
use crate::builder::{RawTriple, RelationSpec};
use crate::dataset::{Answer, Cardinality, Dataset, DatasetMetadata, Instance, Relation, Template, DEFAULT_ANSWER_CAP};
use crate::statement::enumerate_statements;

const SUBJECT_SYLLABLES: [&str; 20] = [
    "ka", "lo", "mi", "ren", "tas", "vo", "bel", "dur", "sen", "pha", "gri", "nol", "zu", "cor", "fen", "hu",
    "jas", "wen", "bri", "tol",
];
const ANSWER_SYLLABLES: [&str; 20] = [
    "ar", "es", "ix", "om", "ul", "ba", "de", "fi", "go", "ky", "ma", "ne", "pi", "qua", "ro", "sa", "te", "vi",
    "xo", "yl",
];
const WORDS: usize = 8000;

const TEMPLATES: [&str; 3] = [
    "[X] is associated with [Y].",
    "The [Y] of [X] is well known.",
    "[X] belongs with [Y].",
];

fn word(syllables: &[&str; 20], index: usize) -> String {
    // 7919 is coprime with 8000, so this permutes 0..8000
    let mut n = (index % WORDS) * 7919 % WORDS;
    let mut w = String::new();
    for _ in 0..3 {
        w.push_str(syllables[n % 20]);
        n /= 20;
    }
    let mut c = w.chars();
    let first = c.next().unwrap().to_uppercase();
    first.chain(c).collect()
}

/// The `index`-th subject label of a relation.
pub fn subject_label(salt: usize, index: usize) -> String {
    format!(
        "{} {}",
        word(&SUBJECT_SYLLABLES, index),
        word(&SUBJECT_SYLLABLES, index * 31 + salt * 977 + 1)
    )
}

/// The `index`-th answer label of a relation; distinct for index < 8000.
pub fn answer_label(salt: usize, index: usize) -> String {
    word(&ANSWER_SYLLABLES, index + salt * 131)
}

/// Answer-space size and instances per answer for one relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationShape {
    pub id: String,
    pub cardinality: Cardinality,
    pub answers: usize,
    pub per_answer: usize,
}

impl RelationShape {
    pub fn new(id: impl Into<String>, cardinality: Cardinality, answers: usize, per_answer: usize) -> Self {
        RelationShape {
            id: id.into(),
            cardinality,
            answers,
            per_answer,
        }
    }
}

fn shapes(one_to_one: &[usize], n_to_one: &[(usize, usize, usize)]) -> Vec<RelationShape> {
    let mut out = Vec::new();
    for (i, &k) in one_to_one.iter().enumerate() {
        out.push(RelationShape::new(format!("S{:03}", i + 1), Cardinality::OneToOne, k, 1));
    }
    let mut n = 0;
    for &(count, k, m) in n_to_one {
        for _ in 0..count {
            n += 1;
            out.push(RelationShape::new(format!("M{n:03}"), Cardinality::NToOne, k, m));
        }
    }
    out
}

/// 60 relations matching the published answer-space profile of the
/// standard benchmark: 14 one-to-one relations with 60 answers and 46
/// many-to-one relations, mostly 25 answers with 6 subjects each.
/// Random-guess accuracy: 365/7726 overall, 1/60 one-to-one, 351/6886
/// many-to-one.
pub fn bear_shapes() -> Vec<RelationShape> {
    shapes(
        &[60; 14],
        &[(39, 25, 6), (1, 5, 30), (1, 6, 25), (1, 8, 19), (2, 10, 15), (1, 20, 7), (1, 24, 6)],
    )
}

/// The larger benchmark profile: 194-answer one-to-one relations and
/// 29 to 40 answers per many-to-one relation.
pub fn bear_big_shapes() -> Vec<RelationShape> {
    shapes(&[194; 14], &[(50, 40, 15), (14, 29, 20)])
}

/// 60 relations, 2120 instances, 20 answers everywhere.
pub fn desk_scale_shapes() -> Vec<RelationShape> {
    shapes(&[20; 14], &[(46, 20, 2)])
}

/// Builds a dataset with `templates` templates per relation (at most 3).
/// Instances cycle through the answers, so every answer gets exactly
/// `per_answer` subjects.
pub fn shaped_dataset(name: &str, shapes: &[RelationShape], templates: usize) -> Dataset {
    assert!((1..=TEMPLATES.len()).contains(&templates), "1 to 3 templates");
    let relations = shapes
        .iter()
        .enumerate()
        .map(|(salt, s)| {
            let answers: Vec<Answer> = (0..s.answers)
                .map(|j| Answer {
                    answer_id: format!("{}-A{j:03}", s.id),
                    label: answer_label(salt, j),
                })
                .collect();
            let instances = (0..s.answers * s.per_answer)
                .map(|i| Instance {
                    instance_id: format!("{}-I{i:04}", s.id),
                    subject_label: subject_label(salt, i),
                    correct_answer_id: answers[i % s.answers].answer_id.clone(),
                })
                .collect();
            Relation {
                id: s.id.clone(),
                cardinality: s.cardinality,
                answer_cap: match s.cardinality {
                    Cardinality::OneToOne => s.answers,
                    Cardinality::NToOne => s.answers.max(DEFAULT_ANSWER_CAP),
                },
                popularity_proxy: None,
                templates: TEMPLATES[..templates].iter().map(|t| Template::new(*t)).collect(),
                answers,
                instances,
            }
        })
        .collect();
    Dataset {
        metadata: DatasetMetadata {
            name: name.to_string(),
            version: "1".to_string(),
            source: "synthetic".to_string(),
        },
        relations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    /// Prefers the correct statement of every instance.
    Correct,
    /// Prefers every wrong statement.
    Anti,
    /// Correct on even-numbered instances (counted across the whole
    /// dataset), anti on odd ones.
    Alternating,
}

/// One truth-table entry per statement of every instance and template.
pub fn oracle_truth(dataset: &Dataset, kind: OracleKind) -> Vec<(String, Preference)> {
    let mut out = Vec::new();
    let mut n = 0usize;
    for rel in &dataset.relations {
        for inst in &rel.instances {
            let correct_wins = match kind {
                OracleKind::Correct => true,
                OracleKind::Anti => false,
                OracleKind::Alternating => n % 2 == 0,
            };
            n += 1;
            for t in 0..rel.templates.len() {
                for st in enumerate_statements(inst, rel, t).expect("valid synthetic relation") {
                    let is_correct = st.answer_id == inst.correct_answer_id;
                    let pref = if is_correct == correct_wins {
                        Preference::Preferred
                    } else {
                        Preference::Dispreferred
                    };
                    out.push((st.text, pref));
                }
            }
        }
    }
    out
}

/// Raw triples for builder demos: three feasible many-to-one relations with
/// uneven answer pools, unlabeled rows, unpopular and leaky subjects, one
/// ambiguous subject; one feasible one-to-one relation; one many-to-one
/// relation with too few answers.
pub fn builder_triples() -> (Vec<RawTriple>, BTreeMap<String, RelationSpec>) {
    let mut triples = Vec::new();
    let mut specs = BTreeMap::new();
    let templates = |_: &str| TEMPLATES.iter().map(|t| t.to_string()).collect::<Vec<_>>();
    let mut push = |rel: &str, s: usize, subject: String, o: usize, object: String, views: u64| {
        triples.push(RawTriple {
            subject_id: format!("{rel}-Q{s}"),
            subject_label: subject,
            relation_id: rel.to_string(),
            object_id: format!("{rel}-O{o}"),
            object_label: object,
            sitelink_count: views / 1000,
            page_views: Some(views),
        });
    };

    for (salt, rel, answers) in [(0usize, "P19", 32usize), (1, "P27", 28), (2, "P103", 18)] {
        specs.insert(
            rel.to_string(),
            RelationSpec {
                cardinality: Cardinality::NToOne,
                templates: templates(rel),
            },
        );
        let mut s = 0;
        for o in 0..answers {
            let object = answer_label(salt + 10, o);
            let pool = 4 + (o * 7) % 9;
            for _ in 0..pool {
                let views = 5_000 + ((s * 7_919) % 200_000) as u64;
                push(rel, s, subject_label(salt + 10, s), o, object.clone(), views);
                s += 1;
            }
            // a subject that names its answer
            push(rel, s, format!("{object} Tower"), o, object.clone(), 900_000);
            s += 1;
        }
        push(rel, s, String::new(), 0, answer_label(salt + 10, 0), 50_000);
        s += 1;
        // one subject with two objects
        push(rel, s, subject_label(salt + 10, s), 0, answer_label(salt + 10, 0), 80_000);
        push(rel, s, subject_label(salt + 10, s), 1, answer_label(salt + 10, 1), 80_000);
    }

    specs.insert(
        "P36".to_string(),
        RelationSpec {
            cardinality: Cardinality::OneToOne,
            templates: vec!["The capital of [X] is [Y].".into(), "[X] has its capital in [Y].".into()],
        },
    );
    for s in 0..80 {
        push("P36", s, subject_label(20, s), s, answer_label(20, s), 20_000 + s as u64 * 1_000);
    }

    specs.insert(
        "P740".to_string(),
        RelationSpec {
            cardinality: Cardinality::NToOne,
            templates: templates("P740"),
        },
    );
    for s in 0..40 {
        push("P740", s, subject_label(30, s), s % 3, answer_label(30, s % 3), 60_000);
    }
    (triples, specs)
}
