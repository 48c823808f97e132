//! Rankings, accuracies and baselines.
//!
//! All sums run in input order so reports are reproducible bit for bit.

mod baseline;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::ScoreRecord;

pub use baseline::{monte_carlo_baseline, random_baseline, Baseline, McBaseline, McEstimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedResult {
    pub instance_id: String,
    /// Answer indices by descending score; ties by ascending index.
    pub order: Vec<usize>,
    pub correct_index: usize,
    pub rank_of_correct: usize,
    /// The top score is shared by two or more answers.
    pub tie_flag: bool,
    pub scores: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// `None` when there is only one answer.
    pub uncertainty: Option<f64>,
}

impl RankedResult {
    pub fn hit(&self) -> bool {
        self.rank_of_correct == 1
    }

    pub fn predicted_index(&self) -> usize {
        self.order[0]
    }
}

/// Ranks raw scores. `correct_index` must index into `scores`.
pub fn rank_scores(instance_id: &str, scores: &[f64], correct_index: usize) -> Result<RankedResult> {
    if scores.is_empty() {
        return Err(Error::Metrics(format!("instance {instance_id}: no scores to rank")));
    }
    if correct_index >= scores.len() {
        return Err(Error::Metrics(format!(
            "instance {instance_id}: correct index {correct_index} out of range for {} answers",
            scores.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::Metrics(format!("instance {instance_id}: score {i} is NaN")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // stable sort keeps ascending index among equal scores
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let rank_of_correct = order.iter().position(|&i| i == correct_index).unwrap() + 1;
    let top = scores[order[0]];
    let tie_flag = scores.iter().filter(|&&s| s == top).count() > 1;
    let probabilities = softmax_scores(scores);
    let uncertainty = uncertainty(&probabilities)?;
    Ok(RankedResult {
        instance_id: instance_id.to_string(),
        order,
        correct_index,
        rank_of_correct,
        tie_flag,
        scores: scores.to_vec(),
        probabilities,
        uncertainty,
    })
}

/// Ranks the per-answer records of one instance, given in answer order.
pub fn rank_answers(records: &[ScoreRecord], correct_answer_id: &str) -> Result<RankedResult> {
    let first = records
        .first()
        .ok_or_else(|| Error::Metrics("no score records to rank".into()))?;
    for r in records {
        if r.config != first.config {
            return Err(Error::Metrics(format!(
                "mixed scoring configs: {} and {}",
                first.config, r.config
            )));
        }
        if r.statement.instance_id != first.statement.instance_id {
            return Err(Error::Metrics(format!(
                "records span instances {} and {}",
                first.statement.instance_id, r.statement.instance_id
            )));
        }
    }
    let correct = records
        .iter()
        .position(|r| r.statement.answer_id == correct_answer_id)
        .ok_or_else(|| {
            Error::Metrics(format!(
                "instance {}: correct answer {correct_answer_id} not among scored answers",
                first.statement.instance_id
            ))
        })?;
    let scores: Vec<f64> = records.iter().map(|r| r.score).collect();
    rank_scores(&first.statement.instance_id, &scores, correct)
}

pub fn precision_at_k(ranks: &[usize], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Metrics("P@k needs k >= 1".into()));
    }
    if ranks.is_empty() {
        return Err(Error::Metrics("P@k of an empty result set".into()));
    }
    let hits = ranks.iter().filter(|&&r| r <= k).count();
    Ok(hits as f64 / ranks.len() as f64)
}

/// Max-subtracted softmax.
pub fn softmax_scores(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Entropy in nats, with 0 log 0 = 0.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// H(P) / H(U): 1 for a uniform distribution, 0 for a point mass, `None`
/// for a single answer.
pub fn uncertainty(p: &[f64]) -> Result<Option<f64>> {
    if p.is_empty() {
        return Err(Error::Metrics("empty distribution".into()));
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::Metrics(format!("invalid probability {x}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Metrics(format!("probabilities sum to {total}")));
    }
    if p.len() == 1 {
        return Ok(None);
    }
    Ok(Some((entropy(p) / (p.len() as f64).ln()).clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BearScore {
    pub per_template: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

/// Mean and standard error (sample sd with n-1, over sqrt n). A single
/// value has stderr 0.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt() / (n as f64).sqrt())
}

/// One template's outcomes, keyed by an instance identifier.
pub type TemplateOutcomes = Vec<(String, bool)>;

/// Per template, the micro-averaged accuracy over all instances; then the
/// mean over templates with its standard error. Every template must cover
/// the same instance keys.
pub fn bear_score(per_template: &[TemplateOutcomes]) -> Result<BearScore> {
    if per_template.is_empty() {
        return Err(Error::Metrics("no templates".into()));
    }
    fn keys(g: &TemplateOutcomes) -> Vec<&str> {
        let mut k: Vec<&str> = g.iter().map(|(k, _)| k.as_str()).collect();
        k.sort_unstable();
        k
    }
    let reference = keys(&per_template[0]);
    if reference.is_empty() {
        return Err(Error::Metrics("template 0 has no instances".into()));
    }
    if reference.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Metrics("duplicate instance keys within a template".into()));
    }
    for (t, g) in per_template.iter().enumerate().skip(1) {
        if keys(g) != reference {
            return Err(Error::Metrics(format!("template {t} covers a different instance set than template 0")));
        }
    }
    let per_template: Vec<f64> = per_template
        .iter()
        .map(|g| g.iter().filter(|(_, h)| *h).count() as f64 / g.len() as f64)
        .collect();
    let (mean, stderr) = mean_stderr(&per_template);
    Ok(BearScore {
        per_template,
        mean,
        stderr,
    })
}
