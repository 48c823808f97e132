//! Build a balanced dataset from synthetic triples and print the build
//! report, including the relation that could not be built.

use relprobe::builder::{build_from_files, BuilderConfig, RawTriple};
use relprobe::dataset::{validate_dataset, DatasetMetadata, ValidationConfig};
use relprobe::synthetic::builder_triples;

fn main() -> relprobe::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let (triples, specs) = builder_triples();
    let triples_path = dir.path().join("triples.jsonl");
    let specs_path = dir.path().join("relations.json");
    let lines: Vec<String> = triples
        .iter()
        .map(|t: &RawTriple| serde_json::to_string(t).unwrap())
        .collect();
    std::fs::write(&triples_path, lines.join("\n")).unwrap();
    std::fs::write(&specs_path, serde_json::to_string_pretty(&specs).unwrap()).unwrap();

    let out = dir.path().join("dataset");
    let meta = DatasetMetadata {
        name: "demo".into(),
        version: "1".into(),
        source: "synthetic triples".into(),
    };
    let (dataset, report) = build_from_files(&triples_path, &specs_path, meta, &BuilderConfig::default(), 7, &out)?;

    for r in &report.relations {
        let c = &r.counts;
        match &r.reason {
            None => println!(
                "{:<5} {} built   answers={:<3} instances={:<4} (labeled {} -> popular {} -> unambiguous {} -> non-leaky {})",
                r.relation_id,
                r.cardinality.as_str(),
                r.answers,
                r.instances,
                c.labeled,
                c.popular,
                c.unambiguous,
                c.non_leaky
            ),
            Some(why) => println!("{:<5} {} skipped: {why}", r.relation_id, r.cardinality.as_str()),
        }
    }
    print!("{}", validate_dataset(&dataset, &ValidationConfig::default()).render());
    Ok(())
}
