use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Cardinality, Dataset};
use crate::error::{Error, Result};

/// Expected accuracy of a uniformly random guesser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub overall: f64,
    pub one_to_one: Option<f64>,
    pub n_to_one: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McBaseline {
    pub overall: McEstimate,
    pub one_to_one: Option<McEstimate>,
    pub n_to_one: Option<McEstimate>,
}

/// Answer-space size of every instance in the subset.
fn sizes(d: &Dataset, subset: Option<Cardinality>) -> Vec<usize> {
    d.relations
        .iter()
        .filter(|r| subset.map_or(true, |c| r.cardinality == c))
        .flat_map(|r| std::iter::repeat(r.answers.len()).take(r.instances.len()))
        .collect()
}

fn expected(ks: &[usize]) -> Option<f64> {
    if ks.is_empty() {
        return None;
    }
    Some(ks.iter().map(|&k| 1.0 / k as f64).sum::<f64>() / ks.len() as f64)
}

/// Mean over instances of 1/k, overall and per cardinality subset. Subsets
/// without instances are `None`.
pub fn random_baseline(d: &Dataset) -> Result<Baseline> {
    let overall = expected(&sizes(d, None)).ok_or_else(|| Error::Metrics("dataset has no instances".into()))?;
    Ok(Baseline {
        overall,
        one_to_one: expected(&sizes(d, Some(Cardinality::OneToOne))),
        n_to_one: expected(&sizes(d, Some(Cardinality::NToOne))),
    })
}

/// Each trial picks an instance uniformly, draws an i.i.d. uniform score for
/// each of its answers and counts a hit when the correct answer (index 0,
/// without loss of generality) scores highest.
fn simulate(ks: &[usize], trials: usize, rng: &mut ChaCha8Rng) -> McEstimate {
    let mut hits = 0usize;
    for _ in 0..trials {
        let k = ks[rng.gen_range(0..ks.len())];
        let correct: f64 = rng.gen();
        let beaten = (1..k).all(|_| rng.gen::<f64>() < correct);
        hits += beaten as usize;
    }
    let p = hits as f64 / trials as f64;
    McEstimate {
        mean: p,
        stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
    }
}

/// Simulated random-guess accuracy. Every subset uses its own ChaCha8
/// stream of `seed`, so results do not depend on which subsets exist.
pub fn monte_carlo_baseline(d: &Dataset, trials: usize, seed: u64) -> Result<McBaseline> {
    if trials == 0 {
        return Err(Error::Metrics("Monte-Carlo baseline needs at least one trial".into()));
    }
    let run = |subset: Option<Cardinality>, stream: u64| {
        let ks = sizes(d, subset);
        if ks.is_empty() {
            return None;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Some(simulate(&ks, trials, &mut rng))
    };
    Ok(McBaseline {
        overall: run(None, 0).ok_or_else(|| Error::Metrics("dataset has no instances".into()))?,
        one_to_one: run(Some(Cardinality::OneToOne), 1),
        n_to_one: run(Some(Cardinality::NToOne), 2),
    })
}
