//! Probe one dataset as three "models" of different sizes and merge the
//! runs into a comparison table and a Vega-Lite plot spec.
//!
//!     cargo run --example compare_runs -- OUT_DIR

use std::path::PathBuf;

use relprobe::backends::{ReferenceScorer, ScorerRef};
use relprobe::run::{cmd_report, run_probe, ModelInfo, ProbeOptions, ReportFormat, PLOT_FILE};
use relprobe::scoring::ScoringConfig;
use relprobe::synthetic::{bear_shapes, shaped_dataset};

fn main() -> relprobe::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("relprobe-compare"));
    let shapes: Vec<_> = bear_shapes().into_iter().step_by(6).collect();
    let dataset = shaped_dataset("bear-shaped-subset", &shapes, 3);

    let mut dirs = Vec::new();
    for (seed, name, params) in [(1, "tiny", 1.1e8), (2, "base", 3.55e8), (3, "large", 1.3e9)] {
        let scorer = ReferenceScorer::new(seed);
        let mut opts = ProbeOptions::new(ScoringConfig::causal(), out.join(name));
        opts.parallelism = 4;
        opts.model = ModelInfo {
            name: Some(name.into()),
            params: Some(params),
        };
        run_probe(&dataset, ScorerRef::Causal(&scorer), &opts)?;
        dirs.push(opts.out_dir);
    }
    let report_dir = out.join("report");
    for run in cmd_report(&dirs, &report_dir, ReportFormat::Markdown)? {
        println!("{:<6} {:.1}%", run.label, 100.0 * run.report.overall.mean);
    }
    println!("open {} in any Vega-Lite viewer", report_dir.join(PLOT_FILE).display());
    Ok(())
}
