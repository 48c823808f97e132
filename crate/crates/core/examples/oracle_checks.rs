//! End-to-end sanity check with oracle scorers whose answers are known:
//! always right, always wrong, and right on every other instance.

use relprobe::backends::{OracleScorer, ScorerRef};
use relprobe::run::{run_probe, ProbeOptions};
use relprobe::scoring::{PllStrategy, Reduction, ScoringConfig};
use relprobe::synthetic::{desk_scale_shapes, oracle_truth, shaped_dataset, OracleKind};

fn main() -> relprobe::Result<()> {
    let dataset = shaped_dataset("desk-scale", &desk_scale_shapes(), 3);
    let cfg = ScoringConfig::masked(PllStrategy::Original).with_reduction(Reduction::Mean);
    for kind in [OracleKind::Correct, OracleKind::Anti, OracleKind::Alternating] {
        let oracle = OracleScorer::new(oracle_truth(&dataset, kind));
        let dir = tempfile::tempdir().expect("temp dir");
        let mut opts = ProbeOptions::new(cfg, dir.path());
        opts.parallelism = 8;
        let report = run_probe(&dataset, ScorerRef::Masked(&oracle), &opts)?.report.expect("complete");
        println!("{kind:?}: {:.3} ± {:.3}", report.overall.mean, report.overall.stderr);
    }
    Ok(())
}
