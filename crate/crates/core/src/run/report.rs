use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ResultRecord, RunHeader};
use crate::dataset::Cardinality;
use crate::error::{Error, Result};
use crate::metrics::{bear_score, mean_stderr, precision_at_k, Baseline, TemplateOutcomes};

pub const P_AT_K: [usize; 5] = [1, 2, 3, 5, 10];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateAccuracy {
    pub template_index: usize,
    pub hits: usize,
    pub instances: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationScore {
    pub relation_id: String,
    pub cardinality: Cardinality,
    pub per_template: Vec<TemplateAccuracy>,
    /// Mean over templates.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetScore {
    /// Instance-weighted accuracy per template, in template order.
    pub per_template: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
    /// Mean over relations of their template-averaged accuracy.
    pub macro_mean: f64,
    pub relations: usize,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionAtK {
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub header: RunHeader,
    pub templates: Vec<usize>,
    pub per_relation: Vec<RelationScore>,
    pub overall: SubsetScore,
    pub one_to_one: Option<SubsetScore>,
    pub n_to_one: Option<SubsetScore>,
    pub precision_at_k: Vec<PrecisionAtK>,
    /// Expected accuracy of random guessing over the scored instances.
    pub baseline: Baseline,
    pub mean_uncertainty: Option<f64>,
    pub tied_records: usize,
    pub records: usize,
}

fn subset(records: &[&ResultRecord], templates: &[usize], relations: &[RelationScore]) -> Result<Option<SubsetScore>> {
    if records.is_empty() {
        return Ok(None);
    }
    let groups: Vec<TemplateOutcomes> = templates
        .iter()
        .map(|&t| {
            records
                .iter()
                .filter(|r| r.template_index == t)
                .map(|r| (format!("{}\u{1f}{}", r.relation_id, r.instance_id), r.rank_of_correct == 1))
                .collect()
        })
        .collect();
    let bear = bear_score(&groups).map_err(|e| Error::Report(e.to_string()))?;
    let accs: Vec<f64> = relations.iter().map(|r| r.accuracy).collect();
    let (macro_mean, _) = mean_stderr(&accs);
    Ok(Some(SubsetScore {
        per_template: bear.per_template,
        mean: bear.mean,
        stderr: bear.stderr,
        macro_mean,
        relations: relations.len(),
        instances: groups[0].len(),
    }))
}

fn inverse_k_mean(records: &[&ResultRecord]) -> Option<f64> {
    if records.is_empty() {
        return None;
    }
    Some(records.iter().map(|r| 1.0 / r.scores.len() as f64).sum::<f64>() / records.len() as f64)
}

impl EvalReport {
    /// Aggregates result records (any order) into a report. The standard
    /// error is computed separately inside each cardinality subset.
    pub fn from_records(header: RunHeader, records: &[ResultRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Report("no result records".into()));
        }
        let mut sorted: Vec<&ResultRecord> = records.iter().collect();
        sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut templates: Vec<usize> = sorted.iter().map(|r| r.template_index).collect();
        templates.sort_unstable();
        templates.dedup();

        let mut by_relation: BTreeMap<&str, Vec<&ResultRecord>> = BTreeMap::new();
        for r in &sorted {
            by_relation.entry(r.relation_id.as_str()).or_default().push(r);
        }
        let mut per_relation = Vec::with_capacity(by_relation.len());
        for (id, recs) in &by_relation {
            let cardinality = recs[0].cardinality;
            let per_template: Vec<TemplateAccuracy> = templates
                .iter()
                .map(|&t| {
                    let in_t: Vec<&&ResultRecord> = recs.iter().filter(|r| r.template_index == t).collect();
                    let hits = in_t.iter().filter(|r| r.rank_of_correct == 1).count();
                    TemplateAccuracy {
                        template_index: t,
                        hits,
                        instances: in_t.len(),
                        accuracy: if in_t.is_empty() { f64::NAN } else { hits as f64 / in_t.len() as f64 },
                    }
                })
                .collect();
            if per_template.iter().any(|t| t.instances == 0) {
                return Err(Error::Report(format!("relation {id} is missing results for some templates")));
            }
            let accs: Vec<f64> = per_template.iter().map(|t| t.accuracy).collect();
            per_relation.push(RelationScore {
                relation_id: id.to_string(),
                cardinality,
                accuracy: mean_stderr(&accs).0,
                per_template,
            });
        }

        let pick = |c: Option<Cardinality>| -> (Vec<&ResultRecord>, Vec<RelationScore>) {
            (
                sorted
                    .iter()
                    .copied()
                    .filter(|r| c.map_or(true, |c| r.cardinality == c))
                    .collect(),
                per_relation
                    .iter()
                    .filter(|r| c.map_or(true, |c| r.cardinality == c))
                    .cloned()
                    .collect(),
            )
        };
        let (all, all_rel) = pick(None);
        let (one, one_rel) = pick(Some(Cardinality::OneToOne));
        let (many, many_rel) = pick(Some(Cardinality::NToOne));

        let ranks: Vec<usize> = sorted.iter().map(|r| r.rank_of_correct).collect();
        let precision_at_k = P_AT_K
            .iter()
            .map(|&k| Ok(PrecisionAtK { k, value: precision_at_k(&ranks, k)? }))
            .collect::<Result<Vec<_>>>()?;
        let unc: Vec<f64> = sorted.iter().filter_map(|r| r.uncertainty).collect();

        Ok(EvalReport {
            header,
            templates: templates.clone(),
            overall: subset(&all, &templates, &all_rel)?.unwrap(),
            one_to_one: subset(&one, &templates, &one_rel)?,
            n_to_one: subset(&many, &templates, &many_rel)?,
            per_relation,
            precision_at_k,
            baseline: Baseline {
                overall: inverse_k_mean(&all).unwrap(),
                one_to_one: inverse_k_mean(&one),
                n_to_one: inverse_k_mean(&many),
            },
            mean_uncertainty: if unc.is_empty() {
                None
            } else {
                Some(unc.iter().sum::<f64>() / unc.len() as f64)
            },
            tied_records: sorted.iter().filter(|r| r.tie_flag).count(),
            records: sorted.len(),
        })
    }

    /// One line per subset in the style of a results table row.
    pub fn summary(&self) -> String {
        let fmt = |name: &str, s: &Option<SubsetScore>| match s {
            Some(s) => format!("{name:<8} {:>6.1}% ± {:.1}  ({} instances)", 100.0 * s.mean, 100.0 * s.stderr, s.instances),
            None => format!("{name:<8}      -"),
        };
        let mut lines = vec![
            fmt("BEAR", &Some(self.overall.clone())),
            fmt("1:1", &self.one_to_one),
            fmt("N:1", &self.n_to_one),
        ];
        lines.push(format!(
            "random   {:>6.1}% / {} / {}",
            100.0 * self.baseline.overall,
            self.baseline.one_to_one.map_or("-".into(), |v| format!("{:.1}%", 100.0 * v)),
            self.baseline.n_to_one.map_or("-".into(), |v| format!("{:.1}%", 100.0 * v)),
        ));
        lines.join("\n")
    }
}
