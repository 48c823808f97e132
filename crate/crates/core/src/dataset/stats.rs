use serde::{Deserialize, Serialize};

use super::{Dataset, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

impl SizeSummary {
    pub fn of(sizes: impl IntoIterator<Item = usize>) -> Option<Self> {
        let sizes: Vec<usize> = sizes.into_iter().collect();
        let min = *sizes.iter().min()?;
        let max = *sizes.iter().max()?;
        let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
        Some(SizeSummary { min, max, mean })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerSpaceStats {
    pub per_relation: Vec<(String, usize)>,
    pub aggregate: Option<SizeSummary>,
}

pub fn answer_space_size_stats(dataset: &Dataset) -> AnswerSpaceStats {
    stats_of(dataset.relations.iter())
}

impl AnswerSpaceStats {
    pub fn of<'a>(relations: impl Iterator<Item = &'a Relation>) -> Self {
        stats_of(relations)
    }
}

fn stats_of<'a>(relations: impl Iterator<Item = &'a Relation>) -> AnswerSpaceStats {
    let per_relation: Vec<(String, usize)> =
        relations.map(|r| (r.id.clone(), r.answers.len())).collect();
    let aggregate = SizeSummary::of(per_relation.iter().map(|p| p.1));
    AnswerSpaceStats {
        per_relation,
        aggregate,
    }
}

/// Pooled instances per answer over the given relations.
pub fn instances_per_answer_mean<'a>(relations: impl Iterator<Item = &'a Relation>) -> Option<f64> {
    let (instances, answers) = relations.fold((0usize, 0usize), |(i, a), r| {
        (i + r.instances.len(), a + r.answers.len())
    });
    (answers > 0).then(|| instances as f64 / answers as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Answer, Cardinality, DatasetMetadata, Template};

    fn rel(id: &str, k: usize) -> Relation {
        Relation {
            id: id.into(),
            cardinality: Cardinality::NToOne,
            answer_cap: 25,
            popularity_proxy: None,
            templates: vec![Template::new("[X] [Y]")],
            answers: (0..k)
                .map(|i| Answer {
                    answer_id: format!("{id}{i}"),
                    label: format!("l{i}"),
                })
                .collect(),
            instances: vec![],
        }
    }

    #[test]
    fn min_max_mean() {
        let d = Dataset {
            metadata: DatasetMetadata::default(),
            relations: vec![rel("a", 4), rel("b", 6)],
        };
        let s = answer_space_size_stats(&d).aggregate.unwrap();
        assert_eq!((s.min, s.max, s.mean), (4, 6, 5.0));
    }

    #[test]
    fn single_relation_is_degenerate() {
        let d = Dataset {
            metadata: DatasetMetadata::default(),
            relations: vec![rel("a", 7)],
        };
        let s = answer_space_size_stats(&d).aggregate.unwrap();
        assert_eq!(s.min, s.max);
        assert_eq!(s.mean, 7.0);
    }

    #[test]
    fn empty_has_no_aggregate() {
        let d = Dataset {
            metadata: DatasetMetadata::default(),
            relations: vec![],
        };
        assert!(answer_space_size_stats(&d).aggregate.is_none());
    }
}
