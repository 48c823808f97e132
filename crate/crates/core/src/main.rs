use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use relprobe::backends::ClientOptions;
use relprobe::builder::BuilderConfig;
use relprobe::dataset::{load_dataset, DatasetMetadata, ValidationConfig};
use relprobe::error::Error;
use relprobe::run::{
    cmd_baseline, cmd_build_dataset, cmd_report, cmd_validate, exit_code_for, open_backend, run_probe, ModelInfo,
    ProbeOptions, ReportFormat, TemplateSelection, EXIT_CONFIG,
};
use relprobe::scoring::{PllStrategy, Reduction, Scope, ScoringConfig};

#[derive(Parser)]
#[command(name = "relprobe", version, about = "Probe language models for relational knowledge")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Causal,
    Masked,
}

#[derive(Subcommand)]
enum Command {
    /// Score every instance and write results.jsonl and report.json.
    Probe {
        #[arg(long)]
        dataset: PathBuf,
        /// http(s)://host:port, or reference[://SEED] for the built-in scorer.
        #[arg(long)]
        backend_url: String,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value = "original")]
        pll_strategy: PllStrategy,
        #[arg(long, default_value = "sum")]
        reduction: Reduction,
        #[arg(long, default_value = "full")]
        scope: Scope,
        /// "all" or a template index.
        #[arg(long, default_value = "all")]
        templates: TemplateSelection,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stored in the report header for comparisons.
        #[arg(long)]
        model_name: Option<String>,
        /// Parameter count, e.g. 1.1e8.
        #[arg(long)]
        model_params: Option<f64>,
        #[arg(long, default_value_t = 60)]
        timeout_secs: u64,
        #[arg(long, default_value_t = 3)]
        attempts: u32,
        #[arg(long, default_value_t = 16)]
        max_in_flight: usize,
    },
    /// Build a balanced dataset from raw triples.
    BuildDataset {
        /// JSONL triples.
        #[arg(long)]
        triples: PathBuf,
        /// JSON object: relation id -> {cardinality, templates}.
        #[arg(long)]
        relations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// JSON builder config; missing keys keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "custom")]
        name: String,
        #[arg(long, default_value = "1")]
        version: String,
    },
    /// Print analytic and Monte-Carlo random baselines.
    Baseline {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Merge result directories into tables, a summary and a plot spec.
    Report {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "tsv")]
        format: ReportFormat,
    },
    /// Check dataset invariants.
    Validate {
        #[arg(long)]
        dataset: PathBuf,
        /// Largest allowed answer-frequency spread.
        #[arg(long, default_value_t = 1)]
        max_spread: usize,
    },
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_code_for(err) as u8)
}

fn run(command: Command) -> Result<i32, Error> {
    match command {
        Command::Probe {
            dataset,
            backend_url,
            mode,
            pll_strategy,
            reduction,
            scope,
            templates,
            parallelism,
            cache,
            out,
            seed,
            model_name,
            model_params,
            timeout_secs,
            attempts,
            max_in_flight,
        } => {
            let scoring = match mode {
                ModeArg::Causal => ScoringConfig::causal(),
                ModeArg::Masked => ScoringConfig::masked(pll_strategy),
            }
            .with_reduction(reduction)
            .with_scope(scope);
            let dataset = load_dataset(&dataset)?;
            let mut client = ClientOptions::default();
            client.timeout = Duration::from_secs(timeout_secs);
            client.retry.attempts = attempts;
            client.max_in_flight = max_in_flight;
            let backend = open_backend(&backend_url, scoring.mode, cache.as_deref(), seed, client)?;
            let opts = ProbeOptions {
                scoring,
                templates,
                parallelism,
                out_dir: out.clone(),
                seed,
                model: ModelInfo {
                    name: model_name,
                    params: model_params,
                },
            };
            let outcome = backend.with_scorer(scoring.mode, |s| run_probe(&dataset, s, &opts))?;
            match (&outcome.report, &outcome.error) {
                (Some(report), _) => {
                    println!("{}: {} records ({} resumed)", scoring, outcome.total, outcome.resumed);
                    println!("{}", report.summary());
                    println!("results in {}", out.display());
                }
                (None, Some(e)) => {
                    eprintln!("error: {e}");
                    eprintln!(
                        "stopped after {} of {} items ({} resumed); rerun to continue",
                        outcome.resumed + outcome.completed,
                        outcome.total,
                        outcome.resumed
                    );
                }
                (None, None) => unreachable!(),
            }
            Ok(outcome.exit_code())
        }
        Command::BuildDataset {
            triples,
            relations,
            out,
            config,
            seed,
            name,
            version,
        } => {
            let cfg: BuilderConfig = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                    serde_json::from_str(&text)?
                }
                None => BuilderConfig::default(),
            };
            let metadata = DatasetMetadata {
                name,
                version,
                source: triples.display().to_string(),
            };
            let report = cmd_build_dataset(&triples, &relations, &out, metadata, &cfg, seed)?;
            for r in &report.relations {
                match &r.reason {
                    None => println!(
                        "{:<8} {:<4} built: {} answers, {} instances",
                        r.relation_id,
                        r.cardinality.as_str(),
                        r.answers,
                        r.instances
                    ),
                    Some(why) => println!("{:<8} {:<4} infeasible: {why}", r.relation_id, r.cardinality.as_str()),
                }
            }
            println!("validation {}", if report.validation_passed { "PASS" } else { "FAIL" });
            Ok(if report.validation_passed { 0 } else { EXIT_CONFIG })
        }
        Command::Baseline {
            dataset,
            trials,
            seed,
            json,
        } => {
            let b = cmd_baseline(&dataset, trials, seed)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&b)?);
            } else {
                print!("{b}");
            }
            Ok(0)
        }
        Command::Report { results, out, format } => {
            let runs = cmd_report(&results, &out, format)?;
            for r in &runs {
                println!("== {}", r.label);
                println!("{}", r.report.summary());
            }
            println!("report written to {}", out.display());
            Ok(0)
        }
        Command::Validate { dataset, max_spread } => {
            let cfg = ValidationConfig {
                max_balance_spread: max_spread,
                ..ValidationConfig::default()
            };
            let report = cmd_validate(&dataset, &cfg)?;
            print!("{}", report.render());
            Ok(if report.passed() { 0 } else { EXIT_CONFIG })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // usage errors are configuration errors, not backend failures
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => fail(&e),
    }
}
