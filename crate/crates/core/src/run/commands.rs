use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::backends::{
    Backend, BackendIdentity, CacheStore, CachedScorer, ClientOptions, FullScorer, ReferenceScorer, RemoteClient, ScorerRef,
};
use crate::builder::{build_from_files, BuildReport, BuilderConfig};
use crate::dataset::{load_dataset, validate_dataset, DatasetMetadata, ValidationConfig, ValidationReport};
use crate::error::{Error, Result};
use crate::metrics::{monte_carlo_baseline, random_baseline, Baseline, McBaseline};
use crate::scoring::Mode;

/// A resolved backend plus its optional on-disk cache.
pub struct BackendHandle {
    scorer: Arc<dyn FullScorer>,
    cache: Option<CacheStore>,
}

impl BackendHandle {
    pub fn new(scorer: Arc<dyn FullScorer>, cache: Option<CacheStore>) -> Self {
        BackendHandle { scorer, cache }
    }

    pub fn identity(&self) -> &BackendIdentity {
        self.scorer.identity()
    }

    pub fn cache(&self) -> Option<&CacheStore> {
        self.cache.as_ref()
    }

    /// Calls `f` with the scorer (behind the cache, if any) viewed for `mode`.
    pub fn with_scorer<R>(&self, mode: Mode, f: impl FnOnce(ScorerRef<'_>) -> R) -> R {
        let inner: &dyn FullScorer = &*self.scorer;
        match &self.cache {
            Some(store) => {
                let cached = CachedScorer::new(inner, store);
                f(match mode {
                    Mode::Causal => ScorerRef::Causal(&cached),
                    Mode::Masked { .. } => ScorerRef::Masked(&cached),
                })
            }
            None => f(match mode {
                Mode::Causal => ScorerRef::Causal(inner),
                Mode::Masked { .. } => ScorerRef::Masked(inner),
            }),
        }
    }
}

/// Resolves `--backend-url`.
///
/// `reference` or `reference://SEED` selects the built-in hashed scorer
/// (seed defaults to `seed`). Anything else is an HTTP endpoint; if it is
/// unreachable but the cache remembers its identity, the run continues from
/// cache and only fails on a miss.
pub fn open_backend(
    url: &str,
    mode: Mode,
    cache: Option<&Path>,
    seed: u64,
    options: ClientOptions,
) -> Result<BackendHandle> {
    let cache = cache.map(CacheStore::open).transpose()?;
    if let Some(rest) = url.strip_prefix("reference") {
        let seed = match rest {
            "" | "://" => seed,
            r => match r.strip_prefix("://") {
                Some(s) => s
                    .parse()
                    .map_err(|_| Error::Config(format!("bad reference seed in {url:?}")))?,
                None => return Err(Error::Config(format!("unknown backend {url:?}"))),
            },
        };
        return Ok(BackendHandle::new(Arc::new(ReferenceScorer::new(seed)), cache));
    }
    if !(url.starts_with("http://") || url.starts_with("https://")) {
        return Err(Error::Config(format!("unknown backend {url:?}")));
    }
    let client = match RemoteClient::connect(url, options.clone()) {
        Ok(c) => {
            let wanted = match mode {
                Mode::Causal => "causal",
                Mode::Masked { .. } => "masked",
            };
            if !c.supported_modes().is_empty() && !c.supported_modes().iter().any(|m| m == wanted) {
                return Err(Error::Config(format!("{url} does not support {wanted} scoring")));
            }
            if let Some(store) = &cache {
                store.remember_identity(url, c.identity())?;
            }
            c
        }
        Err(e) => match cache.as_ref().and_then(|s| s.recall_identity(url)) {
            Some(id) => {
                log::warn!("{url} unreachable ({e}); continuing from cache as {}@{}", id.name, id.revision);
                RemoteClient::with_identity(url, id, options)
            }
            None => return Err(e.into()),
        },
    };
    Ok(BackendHandle::new(Arc::new(client), cache))
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineSummary {
    pub analytic: Baseline,
    pub monte_carlo: McBaseline,
}

impl fmt::Display for BaselineSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{:.2}%", 100.0 * v));
        writeln!(f, "subset   analytic   monte-carlo")?;
        let rows = [
            ("overall", Some(self.analytic.overall), Some(self.monte_carlo.overall)),
            ("1:1", self.analytic.one_to_one, self.monte_carlo.one_to_one),
            ("N:1", self.analytic.n_to_one, self.monte_carlo.n_to_one),
        ];
        for (name, a, mc) in rows {
            let mc = mc.map_or("-".to_string(), |m| {
                format!("{:.2}% ± {:.2} ({} trials)", 100.0 * m.mean, 100.0 * m.stderr, m.trials)
            });
            writeln!(f, "{name:<8} {:<10} {mc}", pct(a))?;
        }
        Ok(())
    }
}

pub fn cmd_baseline(dataset: &Path, trials: usize, seed: u64) -> Result<BaselineSummary> {
    let d = load_dataset(dataset)?;
    Ok(BaselineSummary {
        analytic: random_baseline(&d)?,
        monte_carlo: monte_carlo_baseline(&d, trials, seed)?,
    })
}

pub fn cmd_validate(dataset: &Path, cfg: &ValidationConfig) -> Result<ValidationReport> {
    Ok(validate_dataset(&load_dataset(dataset)?, cfg))
}

/// Builds and writes the dataset. Fails if no relation could be built.
pub fn cmd_build_dataset(
    triples: &Path,
    relations: &Path,
    out: &Path,
    metadata: DatasetMetadata,
    cfg: &BuilderConfig,
    seed: u64,
) -> Result<BuildReport> {
    let (_, report) = build_from_files(triples, relations, metadata, cfg, seed, out)?;
    if report.built().next().is_none() {
        let reasons: Vec<String> = report
            .infeasible()
            .map(|r| format!("{}: {}", r.relation_id, r.reason.as_deref().unwrap_or("?")))
            .collect();
        return Err(Error::Dataset(format!("every relation is infeasible ({})", reasons.join("; "))));
    }
    Ok(report)
}
