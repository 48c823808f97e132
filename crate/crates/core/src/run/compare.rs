use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::{read_report, read_results, EvalReport, ResultRecord, REPORT_FILE, RESULTS_FILE};
use crate::error::{Error, Result};

pub const PER_RELATION_STEM: &str = "per_relation";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_FILE: &str = "plot.vl.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Tsv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(ReportFormat::Tsv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(Error::Config(format!("unknown report format {s:?} (tsv, markdown)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResults {
    pub dir: PathBuf,
    pub label: String,
    /// Re-derived from the result records.
    pub report: EvalReport,
    pub records: Vec<ResultRecord>,
}

/// Loads one result directory and re-aggregates its records, failing if
/// the stored report disagrees.
pub fn load_run(dir: &Path) -> Result<RunResults> {
    let stored = read_report(&dir.join(REPORT_FILE))?;
    let records = read_results(&dir.join(RESULTS_FILE))?;
    if records.is_empty() {
        return Err(Error::Report(format!("{}: empty results", dir.display())));
    }
    let report = EvalReport::from_records(stored.header.clone(), &records)?;
    if report != stored {
        return Err(Error::Report(format!(
            "{}: {REPORT_FILE} does not match {RESULTS_FILE}",
            dir.display()
        )));
    }
    let label = report.header.model.name.clone().unwrap_or_else(|| {
        dir.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string())
    });
    Ok(RunResults {
        dir: dir.to_path_buf(),
        label,
        report,
        records,
    })
}

fn relation_ids(r: &EvalReport) -> BTreeSet<&str> {
    r.per_relation.iter().map(|x| x.relation_id.as_str()).collect()
}

fn disambiguate_labels(runs: &mut [RunResults]) {
    for i in 0..runs.len() {
        let dupes = runs.iter().filter(|r| r.label == runs[i].label).count();
        if dupes > 1 {
            runs[i].label = format!("{} ({})", runs[i].label, runs[i].dir.display());
        }
    }
}

fn relation_table(runs: &[RunResults], format: ReportFormat) -> String {
    let first = &runs[0].report;
    let mut lines = Vec::new();
    match format {
        ReportFormat::Tsv => {
            let mut head = vec!["relation".to_string(), "cardinality".to_string()];
            head.extend(runs.iter().map(|r| r.label.clone()));
            lines.push(head.join("\t"));
        }
        ReportFormat::Markdown => {
            let mut head = vec!["relation".to_string(), "cardinality".to_string()];
            head.extend(runs.iter().map(|r| r.label.replace('|', "\\|")));
            lines.push(format!("| {} |", head.join(" | ")));
            lines.push(format!("|{}", "---|".repeat(head.len())));
        }
    }
    for (i, rel) in first.per_relation.iter().enumerate() {
        let mut cells = vec![rel.relation_id.clone(), rel.cardinality.as_str().to_string()];
        for run in runs {
            let acc = run.report.per_relation[i].accuracy;
            cells.push(match format {
                ReportFormat::Tsv => format!("{acc:.6}"),
                ReportFormat::Markdown => format!("{:.1}", 100.0 * acc),
            });
        }
        lines.push(match format {
            ReportFormat::Tsv => cells.join("\t"),
            ReportFormat::Markdown => format!("| {} |", cells.join(" | ")),
        });
    }
    lines.join("\n") + "\n"
}

#[derive(Serialize)]
struct RunSummary<'a> {
    label: &'a str,
    dir: String,
    header: &'a super::RunHeader,
    overall: &'a super::SubsetScore,
    one_to_one: &'a Option<super::SubsetScore>,
    n_to_one: &'a Option<super::SubsetScore>,
    precision_at_k: &'a [super::PrecisionAtK],
    baseline: &'a crate::metrics::Baseline,
    mean_uncertainty: Option<f64>,
}

/// A Vega-Lite document: score against log-scaled parameter count (runs
/// with a known size) above grouped per-relation accuracy bars.
pub fn plot_spec(runs: &[RunResults]) -> Value {
    let points: Vec<Value> = runs
        .iter()
        .filter_map(|r| {
            let params = r.report.header.model.params?;
            let s = &r.report.overall;
            Some(json!({
                "model": r.label,
                "params": params,
                "score": s.mean,
                "lower": s.mean - s.stderr,
                "upper": s.mean + s.stderr,
            }))
        })
        .collect();
    let bars: Vec<Value> = runs
        .iter()
        .flat_map(|r| {
            r.report.per_relation.iter().map(move |rel| {
                json!({
                    "model": r.label,
                    "relation": rel.relation_id,
                    "cardinality": rel.cardinality.as_str(),
                    "accuracy": rel.accuracy,
                })
            })
        })
        .collect();
    let x = json!({
        "field": "params",
        "type": "quantitative",
        "scale": {"type": "log"},
        "title": "Parameters (log scale)",
    });
    let mut charts = Vec::new();
    if !points.is_empty() {
        charts.push(json!({
            "title": "Score by model size",
            "data": {"values": points},
            "width": 480,
            "height": 300,
            "layer": [
                {
                    "mark": {"type": "point", "filled": true, "size": 80},
                    "encoding": {
                        "x": x,
                        "y": {"field": "score", "type": "quantitative", "title": "Score", "axis": {"format": ".0%"}},
                        "color": {"field": "model", "type": "nominal"},
                        "tooltip": [
                            {"field": "model", "type": "nominal"},
                            {"field": "params", "type": "quantitative", "format": ".3s"},
                            {"field": "score", "type": "quantitative", "format": ".2%"},
                        ],
                    },
                },
                {
                    "mark": "rule",
                    "encoding": {
                        "x": x,
                        "y": {"field": "lower", "type": "quantitative"},
                        "y2": {"field": "upper"},
                        "color": {"field": "model", "type": "nominal"},
                    },
                },
            ],
        }));
    }
    charts.push(json!({
        "title": "Accuracy per relation",
        "data": {"values": bars},
        "mark": "bar",
        "width": {"step": 12},
        "height": 240,
        "encoding": {
            "x": {"field": "relation", "type": "nominal", "sort": null, "title": "Relation"},
            "xOffset": {"field": "model", "type": "nominal"},
            "y": {"field": "accuracy", "type": "quantitative", "title": "Accuracy", "axis": {"format": ".0%"}},
            "color": {"field": "model", "type": "nominal"},
            "tooltip": [
                {"field": "relation", "type": "nominal"},
                {"field": "cardinality", "type": "nominal"},
                {"field": "model", "type": "nominal"},
                {"field": "accuracy", "type": "quantitative", "format": ".1%"},
            ],
        },
    }));
    json!({
        "$schema": "https://vega.github.io/schema/vega-lite/v5.json",
        "description": "Probing accuracy by model size and by relation",
        "vconcat": charts,
    })
}

/// Merges one or more result directories into a comparison table, a JSON
/// summary and a plot spec under `out`. All runs must cover the same
/// relations.
pub fn cmd_report(dirs: &[PathBuf], out: &Path, format: ReportFormat) -> Result<Vec<RunResults>> {
    if dirs.is_empty() {
        return Err(Error::Report("no result directories given".into()));
    }
    let mut runs = dirs.iter().map(|d| load_run(d)).collect::<Result<Vec<_>>>()?;
    let base = relation_ids(&runs[0].report);
    for r in &runs[1..] {
        let other = relation_ids(&r.report);
        if other != base {
            let only_a: Vec<&str> = base.difference(&other).copied().collect();
            let only_b: Vec<&str> = other.difference(&base).copied().collect();
            return Err(Error::Report(format!(
                "incomparable result sets: {} vs {} (only in first: [{}], only in second: [{}])",
                runs[0].dir.display(),
                r.dir.display(),
                only_a.join(", "),
                only_b.join(", ")
            )));
        }
    }
    disambiguate_labels(&mut runs);

    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let ext = match format {
        ReportFormat::Tsv => "tsv",
        ReportFormat::Markdown => "md",
    };
    let table_path = out.join(format!("{PER_RELATION_STEM}.{ext}"));
    fs::write(&table_path, relation_table(&runs, format)).map_err(|e| Error::io(&table_path, e))?;

    let summaries: Vec<RunSummary> = runs
        .iter()
        .map(|r| RunSummary {
            label: &r.label,
            dir: r.dir.display().to_string(),
            header: &r.report.header,
            overall: &r.report.overall,
            one_to_one: &r.report.one_to_one,
            n_to_one: &r.report.n_to_one,
            precision_at_k: &r.report.precision_at_k,
            baseline: &r.report.baseline,
            mean_uncertainty: r.report.mean_uncertainty,
        })
        .collect();
    let summary_path = out.join(SUMMARY_FILE);
    fs::write(&summary_path, serde_json::to_string_pretty(&json!({ "runs": summaries }))? + "\n")
        .map_err(|e| Error::io(&summary_path, e))?;

    let plot_path = out.join(PLOT_FILE);
    fs::write(&plot_path, serde_json::to_string_pretty(&plot_spec(&runs))? + "\n")
        .map_err(|e| Error::io(&plot_path, e))?;
    Ok(runs)
}
