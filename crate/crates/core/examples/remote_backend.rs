//! Serve the reference scorer over HTTP, probe through the remote client
//! with an on-disk cache, then probe again and watch the server stay idle.

use std::sync::Arc;

use relprobe::backends::{CacheStore, CachedScorer, ClientOptions, ProtocolServer, ReferenceScorer, RemoteClient, ScorerRef, ServerOptions};
use relprobe::run::{run_probe, ProbeOptions, RESULTS_FILE};
use relprobe::scoring::{PllStrategy, ScoringConfig};
use relprobe::synthetic::{shaped_dataset, RelationShape};
use relprobe::dataset::Cardinality;

fn main() -> relprobe::Result<()> {
    let server = ProtocolServer::start(Arc::new(ReferenceScorer::new(3)), ServerOptions::default()).expect("bind");
    let client = RemoteClient::connect(server.url(), ClientOptions::default())?;
    println!("connected to {} ({:?})", server.url(), client.supported_modes());

    let shapes: Vec<RelationShape> = (0..5)
        .map(|i| RelationShape::new(format!("R{i}"), Cardinality::NToOne, 8, 3))
        .collect();
    let dataset = shaped_dataset("small", &shapes, 2);
    let dir = tempfile::tempdir().expect("temp dir");
    let cache = CacheStore::open(dir.path().join("cache.jsonl"))?;
    let cached = CachedScorer::new(&client, &cache);
    let scoring = ScoringConfig::masked(PllStrategy::Original);

    let mut opts = ProbeOptions::new(scoring, dir.path().join("first"));
    opts.parallelism = 4;
    run_probe(&dataset, ScorerRef::Masked(&cached), &opts)?;
    let after_first = server.request_count();

    opts.out_dir = dir.path().join("second");
    run_probe(&dataset, ScorerRef::Masked(&cached), &opts)?;
    println!(
        "requests: {after_first} on the first run, {} on the second; {} cache entries",
        server.request_count() - after_first,
        cache.len()
    );
    let a = std::fs::read(dir.path().join("first").join(RESULTS_FILE)).unwrap();
    let b = std::fs::read(dir.path().join("second").join(RESULTS_FILE)).unwrap();
    println!("result files identical: {}", a == b);
    Ok(())
}
