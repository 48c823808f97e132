use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{filter_unlabeled, fuzzy_similarity, is_leaky, BuilderConfig, RawTriple, RelationSpec};
use crate::dataset::{Answer, Cardinality, Instance, PopularityProxy, Relation, Template};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub subject_id: String,
    pub subject_label: String,
    pub popularity: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerPool {
    pub answer: Answer,
    /// Most popular first, ties by subject id.
    pub subjects: Vec<Candidate>,
    pub median_popularity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerSpace {
    /// Selected answers, most popular first.
    pub pools: Vec<AnswerPool>,
    pub eligible_answers: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Infeasibility {
    NoTemplates,
    NoLabeledTriples,
    PopularityEmptied,
    LeakageEmptied,
    BelowMinimum { found: usize, minimum: usize },
    PoolExhausted { answer_id: String, available: usize, needed: usize },
}

impl Infeasibility {
    pub fn reason(&self) -> String {
        match self {
            Infeasibility::NoTemplates => "no templates supplied".into(),
            Infeasibility::NoLabeledTriples => "no labeled triples".into(),
            Infeasibility::PopularityEmptied => "popularity filter emptied pools".into(),
            Infeasibility::LeakageEmptied => "leakage filter emptied pools".into(),
            Infeasibility::BelowMinimum { found, minimum } => {
                format!("answer space below minimum ({found} < {minimum})")
            }
            Infeasibility::PoolExhausted {
                answer_id,
                available,
                needed,
            } => format!("pool exhausted for {answer_id} ({available} < {needed})"),
        }
    }
}

/// Surviving triples (or answers) after each stage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub labeled: usize,
    pub popular: usize,
    pub unambiguous: usize,
    pub non_leaky: usize,
    pub eligible_answers: usize,
    pub selected_answers: usize,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BuildOutcome {
    Built {
        relation: Relation,
        counts: StageCounts,
        /// Answer ids whose label shape deviates from the majority, for
        /// manual review.
        outliers: Vec<String>,
    },
    Infeasible {
        relation_id: String,
        reason: Infeasibility,
        counts: StageCounts,
    },
}

impl BuildOutcome {
    pub fn relation(&self) -> Option<&Relation> {
        match self {
            BuildOutcome::Built { relation, .. } => Some(relation),
            BuildOutcome::Infeasible { .. } => None,
        }
    }
}

fn popularity(t: &RawTriple, proxy: PopularityProxy) -> u64 {
    match proxy {
        PopularityProxy::PageViews => t.page_views.unwrap_or(0),
        PopularityProxy::Sitelinks => t.sitelink_count,
    }
}

fn median(sorted_desc: &[Candidate]) -> f64 {
    let n = sorted_desc.len();
    if n == 0 {
        return 0.0;
    }
    let mid = n / 2;
    if n % 2 == 1 {
        sorted_desc[mid].popularity as f64
    } else {
        (sorted_desc[mid - 1].popularity as f64 + sorted_desc[mid].popularity as f64) / 2.0
    }
}

fn per_answer(cardinality: Cardinality, cfg: &BuilderConfig) -> (usize, usize) {
    match cardinality {
        Cardinality::NToOne => (cfg.per_answer_target, cfg.answer_cap),
        Cardinality::OneToOne => (1, cfg.one_to_one_cap),
    }
}

/// Greedy by popularity: a subject is kept unless it is fuzzy-similar to a
/// subject already kept in the same pool.
fn distinct_subjects(mut subjects: Vec<Candidate>, threshold: f64) -> Vec<Candidate> {
    subjects.sort_by(|a, b| b.popularity.cmp(&a.popularity).then_with(|| a.subject_id.cmp(&b.subject_id)));
    let mut kept: Vec<Candidate> = Vec::with_capacity(subjects.len());
    for s in subjects {
        if kept
            .iter()
            .all(|k| fuzzy_similarity(&k.subject_label, &s.subject_label) < threshold)
        {
            kept.push(s);
        }
    }
    kept
}

/// Picks the answer space from triples that already passed the label,
/// popularity and own-answer leakage filters.
///
/// An answer is eligible when its pool of fuzzy-distinct subjects can
/// supply the per-answer target (one subject for 1:1 relations). Eligible
/// answers are ranked by median subject popularity, near-duplicate answer
/// labels keep only the more popular one, and the list is cut at the cap.
/// Subjects that leak any selected answer label are then removed and the
/// selection repeated until nothing changes.
pub fn select_answer_space(
    triples: &[RawTriple],
    proxy: PopularityProxy,
    cardinality: Cardinality,
    cfg: &BuilderConfig,
) -> Result<AnswerSpace, Infeasibility> {
    let (need, cap) = per_answer(cardinality, cfg);
    let th = cfg.leakage_threshold;

    let mut grouped: BTreeMap<&str, (String, Vec<Candidate>)> = BTreeMap::new();
    for t in triples {
        let entry = grouped
            .entry(t.object_id.as_str())
            .or_insert_with(|| (t.object_label.clone(), Vec::new()));
        entry.1.push(Candidate {
            subject_id: t.subject_id.clone(),
            subject_label: t.subject_label.clone(),
            popularity: popularity(t, proxy),
        });
    }
    let mut pools: Vec<AnswerPool> = grouped
        .into_iter()
        .map(|(id, (label, subjects))| AnswerPool {
            answer: Answer {
                answer_id: id.to_string(),
                label,
            },
            subjects: distinct_subjects(subjects, th),
            median_popularity: 0.0,
        })
        .collect();

    loop {
        for p in &mut pools {
            p.median_popularity = median(&p.subjects);
        }
        let mut eligible: Vec<&AnswerPool> = pools.iter().filter(|p| p.subjects.len() >= need).collect();
        eligible.sort_by(|a, b| {
            b.median_popularity
                .total_cmp(&a.median_popularity)
                .then_with(|| a.answer.answer_id.cmp(&b.answer.answer_id))
        });
        let eligible_answers = eligible.len();
        let mut selected: Vec<&AnswerPool> = Vec::new();
        for p in eligible {
            if selected.len() == cap {
                break;
            }
            if selected
                .iter()
                .all(|s| fuzzy_similarity(&s.answer.label, &p.answer.label) < th)
            {
                selected.push(p);
            }
        }
        let labels: Vec<String> = selected.iter().map(|p| p.answer.label.clone()).collect();
        let chosen: Vec<String> = selected.iter().map(|p| p.answer.answer_id.clone()).collect();

        let mut removed = 0;
        for p in &mut pools {
            let before = p.subjects.len();
            p.subjects
                .retain(|s| !labels.iter().any(|l| is_leaky(&s.subject_label, l, th)));
            removed += before - p.subjects.len();
        }
        if removed == 0 {
            let out: Vec<AnswerPool> = chosen
                .iter()
                .map(|id| pools.iter().find(|p| &p.answer.answer_id == id).unwrap().clone())
                .collect();
            if out.len() < cfg.min_answers {
                return Err(Infeasibility::BelowMinimum {
                    found: out.len(),
                    minimum: cfg.min_answers,
                });
            }
            return Ok(AnswerSpace {
                pools: out,
                eligible_answers,
            });
        }
    }
}

fn relation_stream(relation_id: &str) -> u64 {
    let d = Sha256::digest(relation_id.as_bytes());
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// N:1 relations take the `per_answer_target` most popular subjects of every
/// answer. 1:1 relations take one subject per answer uniformly at random.
pub fn balanced_sample(
    relation_id: &str,
    space: &AnswerSpace,
    cardinality: Cardinality,
    cfg: &BuilderConfig,
    seed: u64,
) -> Result<Vec<Instance>, Infeasibility> {
    let (need, _) = per_answer(cardinality, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(relation_stream(relation_id));
    let mut out = Vec::with_capacity(space.pools.len() * need);
    for p in &space.pools {
        if p.subjects.len() < need {
            return Err(Infeasibility::PoolExhausted {
                answer_id: p.answer.answer_id.clone(),
                available: p.subjects.len(),
                needed: need,
            });
        }
        let picked: Vec<&Candidate> = match cardinality {
            Cardinality::NToOne => p.subjects.iter().take(need).collect(),
            Cardinality::OneToOne => vec![&p.subjects[rng.gen_range(0..p.subjects.len())]],
        };
        out.extend(picked.into_iter().map(|s| Instance {
            instance_id: s.subject_id.clone(),
            subject_label: s.subject_label.clone(),
            correct_answer_id: p.answer.answer_id.clone(),
        }));
    }
    Ok(out)
}

fn label_profile(label: &str) -> u8 {
    let mut bits = 0u8;
    let letters: Vec<char> = label.chars().filter(|c| c.is_alphabetic()).collect();
    if !letters.is_empty() {
        bits |= 1;
    }
    if label.chars().any(|c| c.is_numeric()) {
        bits |= 2;
    }
    if label.chars().any(|c| !c.is_alphanumeric() && !c.is_whitespace()) {
        bits |= 4;
    }
    if letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase()) {
        bits |= 8;
    }
    if letters.iter().any(|c| !c.is_ascii()) {
        bits |= 16;
    }
    bits
}

/// Answers whose character-class profile (letters, digits, punctuation,
/// all-caps, non-ASCII) differs from the most common profile.
pub fn label_outliers(answers: &[Answer]) -> Vec<String> {
    if answers.len() < 3 {
        return Vec::new();
    }
    let mut freq: BTreeMap<u8, usize> = BTreeMap::new();
    for a in answers {
        *freq.entry(label_profile(&a.label)).or_default() += 1;
    }
    let majority = freq
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(p, _)| *p)
        .unwrap();
    answers
        .iter()
        .filter(|a| label_profile(&a.label) != majority)
        .map(|a| a.answer_id.clone())
        .collect()
}

pub fn build_relation(
    relation_id: &str,
    triples: &[RawTriple],
    spec: &RelationSpec,
    cfg: &BuilderConfig,
    seed: u64,
) -> BuildOutcome {
    let mut counts = StageCounts::default();
    let infeasible = |reason, counts: &StageCounts| BuildOutcome::Infeasible {
        relation_id: relation_id.to_string(),
        reason,
        counts: counts.clone(),
    };
    if spec.templates.is_empty() {
        return infeasible(Infeasibility::NoTemplates, &counts);
    }

    let mut labeled = filter_unlabeled(triples.iter().filter(|t| t.relation_id == relation_id).cloned().collect());
    labeled.sort_by(|a, b| {
        (&a.subject_id, &a.object_id, &a.subject_label, &a.object_label)
            .cmp(&(&b.subject_id, &b.object_id, &b.subject_label, &b.object_label))
    });
    labeled.dedup_by(|a, b| a.subject_id == b.subject_id && a.object_id == b.object_id);
    counts.labeled = labeled.len();
    if labeled.is_empty() {
        return infeasible(Infeasibility::NoLabeledTriples, &counts);
    }

    let proxy = if labeled.iter().all(|t| t.page_views.is_some()) {
        PopularityProxy::PageViews
    } else {
        PopularityProxy::Sitelinks
    };
    let floor = match proxy {
        PopularityProxy::PageViews => cfg.min_page_views,
        PopularityProxy::Sitelinks => cfg.min_sitelinks,
    };
    let popular: Vec<RawTriple> = labeled.into_iter().filter(|t| popularity(t, proxy) >= floor).collect();
    counts.popular = popular.len();
    if popular.is_empty() {
        return infeasible(Infeasibility::PopularityEmptied, &counts);
    }

    // a subject with several objects has no single correct answer
    let mut objects: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &popular {
        *objects.entry(t.subject_id.as_str()).or_default() += 1;
    }
    let unambiguous: Vec<RawTriple> = popular
        .iter()
        .filter(|t| objects[t.subject_id.as_str()] == 1)
        .cloned()
        .collect();
    counts.unambiguous = unambiguous.len();

    let clean: Vec<RawTriple> = unambiguous
        .into_iter()
        .filter(|t| !is_leaky(&t.subject_label, &t.object_label, cfg.leakage_threshold))
        .collect();
    counts.non_leaky = clean.len();
    if clean.is_empty() && counts.unambiguous > 0 {
        return infeasible(Infeasibility::LeakageEmptied, &counts);
    }

    let space = match select_answer_space(&clean, proxy, spec.cardinality, cfg) {
        Ok(s) => s,
        Err(reason) => return infeasible(reason, &counts),
    };
    counts.eligible_answers = space.eligible_answers;
    counts.selected_answers = space.pools.len();
    let instances = match balanced_sample(relation_id, &space, spec.cardinality, cfg, seed) {
        Ok(i) => i,
        Err(reason) => return infeasible(reason, &counts),
    };
    counts.instances = instances.len();

    let answers: Vec<Answer> = space.pools.iter().map(|p| p.answer.clone()).collect();
    let outliers = label_outliers(&answers);
    let (_, cap) = per_answer(spec.cardinality, cfg);
    BuildOutcome::Built {
        relation: Relation {
            id: relation_id.to_string(),
            cardinality: spec.cardinality,
            answer_cap: cap,
            popularity_proxy: Some(proxy),
            templates: spec.templates.iter().map(Template::new).collect(),
            answers,
            instances,
        },
        counts,
        outliers,
    }
}
