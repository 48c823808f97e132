//! Probe orchestration: fan work items out over a bounded pool, journal
//! completions so an interrupted run can resume, and write sorted result
//! files plus the aggregate report.
//!
//! An output directory holds `results.jsonl` (one [`ResultRecord`] per
//! instance and template) and `report.json` (an [`EvalReport`]). While a run
//! is in flight, completions are appended to `progress.jsonl`; a later run
//! with the same header picks up from there.

mod commands;
mod compare;
mod report;

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backends::{BackendIdentity, ScorerRef};
use crate::dataset::{validate_dataset, Cardinality, Dataset, Relation, ValidationConfig};
use crate::error::{Error, Result};
use crate::metrics::rank_answers;
use crate::scoring::{score_instance, ScoringConfig};

pub use commands::{
    cmd_baseline, cmd_build_dataset, cmd_validate, open_backend, BackendHandle, BaselineSummary,
};
pub use compare::{cmd_report, load_run, plot_spec, ReportFormat, RunResults, PER_RELATION_STEM, PLOT_FILE, SUMMARY_FILE};
pub use report::{EvalReport, PrecisionAtK, RelationScore, SubsetScore, TemplateAccuracy, P_AT_K};

pub const RESULTS_FILE: &str = "results.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const JOURNAL_FILE: &str = "progress.jsonl";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BACKEND: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

/// Maps a failure to the process exit status.
pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_backend() {
        EXIT_BACKEND
    } else {
        EXIT_CONFIG
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateSelection {
    All,
    Index(usize),
}

impl std::str::FromStr for TemplateSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(TemplateSelection::All);
        }
        s.parse()
            .map(TemplateSelection::Index)
            .map_err(|_| Error::Config(format!("templates must be \"all\" or an index, got {s:?}")))
    }
}

impl TemplateSelection {
    fn indices(self, relation: &Relation) -> Result<Vec<usize>> {
        match self {
            TemplateSelection::All => Ok((0..relation.templates.len()).collect()),
            TemplateSelection::Index(i) if i < relation.templates.len() => Ok(vec![i]),
            TemplateSelection::Index(i) => Err(Error::Config(format!(
                "relation {} has {} templates, index {i} requested",
                relation.id,
                relation.templates.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ModelInfo {
    pub name: Option<String>,
    /// Parameter count.
    pub params: Option<f64>,
}

/// Everything that determines a run's output. Stored at the top of the
/// journal and in the report; resume refuses a journal with a different
/// header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub dataset_name: String,
    pub dataset_version: String,
    pub model: ModelInfo,
    pub backend: BackendIdentity,
    pub scoring: ScoringConfig,
    pub templates: TemplateSelection,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerScore {
    pub answer_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub relation_id: String,
    pub cardinality: Cardinality,
    pub instance_id: String,
    pub template_index: usize,
    /// In answer-space order.
    pub scores: Vec<AnswerScore>,
    pub predicted_answer_id: String,
    pub correct_answer_id: String,
    pub rank_of_correct: usize,
    pub tie_flag: bool,
    pub probabilities: Vec<f64>,
    pub uncertainty: Option<f64>,
}

impl ResultRecord {
    pub fn sort_key(&self) -> (&str, &str, usize) {
        (&self.relation_id, &self.instance_id, self.template_index)
    }

    pub fn hit(&self) -> bool {
        self.rank_of_correct == 1
    }
}

/// Scores one (instance, template) pair and ranks the answers.
pub fn probe_item(
    relation: &Relation,
    instance_index: usize,
    template_index: usize,
    scorer: ScorerRef<'_>,
    cfg: &ScoringConfig,
) -> Result<ResultRecord> {
    let instance = &relation.instances[instance_index];
    let scored = score_instance(instance, relation, template_index, scorer, cfg)?;
    let ranked = rank_answers(&scored, &instance.correct_answer_id)?;
    Ok(ResultRecord {
        relation_id: relation.id.clone(),
        cardinality: relation.cardinality,
        instance_id: instance.instance_id.clone(),
        template_index,
        scores: relation
            .answers
            .iter()
            .zip(&ranked.scores)
            .map(|(a, &score)| AnswerScore {
                answer_id: a.answer_id.clone(),
                score,
            })
            .collect(),
        predicted_answer_id: relation.answers[ranked.predicted_index()].answer_id.clone(),
        correct_answer_id: instance.correct_answer_id.clone(),
        rank_of_correct: ranked.rank_of_correct,
        tie_flag: ranked.tie_flag,
        probabilities: ranked.probabilities,
        uncertainty: ranked.uncertainty,
    })
}

#[derive(Debug, Clone)]
pub struct ProbeOptions {
    pub scoring: ScoringConfig,
    pub templates: TemplateSelection,
    pub parallelism: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub model: ModelInfo,
}

impl ProbeOptions {
    pub fn new(scoring: ScoringConfig, out_dir: impl Into<PathBuf>) -> Self {
        ProbeOptions {
            scoring,
            templates: TemplateSelection::All,
            parallelism: 1,
            out_dir: out_dir.into(),
            seed: 0,
            model: ModelInfo::default(),
        }
    }
}

#[derive(Debug)]
pub struct ProbeOutcome {
    pub total: usize,
    /// Items taken from an earlier run's journal.
    pub resumed: usize,
    /// Items finished by this run.
    pub completed: usize,
    /// Set when the run finished every item.
    pub report: Option<EvalReport>,
    /// The first failure (in work-item order) when the run stopped early.
    pub error: Option<Error>,
}

impl ProbeOutcome {
    pub fn is_complete(&self) -> bool {
        self.report.is_some()
    }

    /// 0 when complete; 3 when this run got some work done before failing;
    /// otherwise 2 for backend failures and 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match (&self.error, self.completed) {
            (None, _) => EXIT_OK,
            (Some(_), n) if n > 0 => EXIT_PARTIAL,
            (Some(e), _) => exit_code_for(e),
        }
    }
}

fn write_json_line<T: Serialize>(w: &mut impl Write, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")
}

/// Reads a journal, returning its records if the header matches.
fn read_journal(path: &Path, header: &RunHeader) -> Result<Vec<ResultRecord>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(f).lines();
    let first = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Ok(Vec::new()),
    };
    let found: RunHeader = serde_json::from_str(&first).map_err(|e| Error::Malformed {
        file: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })?;
    if &found != header {
        return Err(Error::Config(format!(
            "{} belongs to a different run configuration; remove it or use another --out",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        match serde_json::from_str::<ResultRecord>(&line) {
            Ok(r) => out.push(r),
            // a torn last line from a killed run
            Err(e) => log::warn!("{}:{}: dropping unreadable journal line: {e}", path.display(), n + 2),
        }
    }
    Ok(out)
}

pub fn write_results(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for r in records {
        write_json_line(&mut w, r).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Malformed {
            file: path.to_path_buf(),
            line: n + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(report)? + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_report(path: &Path) -> Result<EvalReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Runs the probe. Invalid datasets and bad options are returned as `Err`
/// before anything is scored; failures during scoring come back inside the
/// outcome with the journal left on disk.
pub fn run_probe(dataset: &Dataset, scorer: ScorerRef<'_>, opts: &ProbeOptions) -> Result<ProbeOutcome> {
    if opts.parallelism == 0 {
        return Err(Error::Config("parallelism must be at least 1".into()));
    }
    let validation = validate_dataset(dataset, &ValidationConfig::default());
    if !validation.passed() {
        return Err(Error::Dataset(format!("dataset failed validation\n{}", validation.render())));
    }
    // the mode check would otherwise only fire on the first statement
    match (scorer, opts.scoring.mode) {
        (ScorerRef::Causal(_), crate::scoring::Mode::Causal) | (ScorerRef::Masked(_), crate::scoring::Mode::Masked { .. }) => {}
        _ => return Err(Error::Config(format!("backend cannot score {}", opts.scoring))),
    }

    let mut items = Vec::new();
    for (ri, rel) in dataset.relations.iter().enumerate() {
        for t in opts.templates.indices(rel)? {
            for ii in 0..rel.instances.len() {
                items.push((ri, ii, t));
            }
        }
    }
    let header = RunHeader {
        dataset_name: dataset.metadata.name.clone(),
        dataset_version: dataset.metadata.version.clone(),
        model: opts.model.clone(),
        backend: scorer.identity().clone(),
        scoring: opts.scoring,
        templates: opts.templates,
        seed: opts.seed,
    };

    let out = &opts.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let journal_path = out.join(JOURNAL_FILE);
    let mut records = if journal_path.exists() {
        read_journal(&journal_path, &header)?
    } else {
        Vec::new()
    };
    let key = |ri: usize, ii: usize, t: usize| {
        let rel = &dataset.relations[ri];
        (rel.id.clone(), rel.instances[ii].instance_id.clone(), t)
    };
    let wanted: BTreeSet<(String, String, usize)> = items.iter().map(|&(r, i, t)| key(r, i, t)).collect();
    // keep one record per wanted item
    let mut have = BTreeSet::new();
    records.retain(|r| {
        let k = (r.relation_id.clone(), r.instance_id.clone(), r.template_index);
        wanted.contains(&k) && have.insert(k)
    });
    let resumed = records.len();
    let todo: Vec<(usize, usize, usize)> = items
        .iter()
        .copied()
        .filter(|&(r, i, t)| !have.contains(&key(r, i, t)))
        .collect();

    // rewrite the journal compactly, then append through one writer thread
    let file = fs::File::create(&journal_path).map_err(|e| Error::io(&journal_path, e))?;
    let mut w = BufWriter::new(file);
    write_json_line(&mut w, &header)
        .and_then(|_| records.iter().try_for_each(|r| write_json_line(&mut w, r)))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&journal_path, e))?;

    let (tx, rx) = mpsc::channel::<ResultRecord>();
    let writer = std::thread::spawn(move || -> std::io::Result<Vec<ResultRecord>> {
        let mut done = Vec::new();
        for r in rx {
            write_json_line(&mut w, &r)?;
            w.flush()?;
            done.push(r);
        }
        Ok(done)
    });

    let abort = AtomicBool::new(false);
    let completed = AtomicUsize::new(0);
    let first_error: Mutex<Option<(usize, Error)>> = Mutex::new(None);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        todo.par_iter().enumerate().for_each_with(tx, |tx, (n, &(ri, ii, t))| {
            if abort.load(Ordering::Relaxed) {
                return;
            }
            match probe_item(&dataset.relations[ri], ii, t, scorer, &opts.scoring) {
                Ok(rec) => {
                    completed.fetch_add(1, Ordering::Relaxed);
                    if tx.send(rec).is_err() {
                        abort.store(true, Ordering::Relaxed);
                    }
                }
                Err(e) => {
                    abort.store(true, Ordering::Relaxed);
                    let mut slot = first_error.lock().unwrap();
                    if slot.as_ref().map_or(true, |(m, _)| n < *m) {
                        *slot = Some((n, e));
                    }
                }
            }
        });
    });
    let fresh = writer
        .join()
        .map_err(|_| Error::Report("journal writer panicked".into()))?
        .map_err(|e| Error::io(&journal_path, e))?;
    records.extend(fresh);
    let completed = completed.into_inner();

    if let Some((_, err)) = first_error.into_inner().unwrap() {
        return Ok(ProbeOutcome {
            total: items.len(),
            resumed,
            completed,
            report: None,
            error: Some(err),
        });
    }

    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let report = EvalReport::from_records(header, &records)?;
    write_results(&out.join(RESULTS_FILE), &records)?;
    write_report(&out.join(REPORT_FILE), &report)?;
    fs::remove_file(&journal_path).map_err(|e| Error::io(&journal_path, e))?;
    Ok(ProbeOutcome {
        total: items.len(),
        resumed,
        completed,
        report: Some(report),
        error: None,
    })
}
