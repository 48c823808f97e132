//! Acceptance checks 1-9 (2b only when `RELPROBE_SERVER_URL` points at a
//! live server). Prints one PASS/FAIL/SKIP line per check and exits
//! nonzero if any check fails.
//!
//! `RELPROBE_BEAR_RELEASE` may point at a directory in the public release
//! layout; without it check 1 runs on the bundled benchmark-shaped fixture.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relprobe::backends::{
    Backend, BackendIdentity, CacheStore, CachedScorer, CausalScorer, ClientOptions, CountingScorer, OracleScorer,
    ReferenceScorer, ScorerRef,
};
use relprobe::builder::{build_relation, fuzzy_similarity, is_leaky, BuildOutcome, BuilderConfig, RawTriple};
use relprobe::dataset::{
    convert_release, validate_dataset, Answer, Cardinality, Dataset, DatasetMetadata, Instance, Relation, Template,
    ValidationConfig,
};
use relprobe::metrics::{entropy, monte_carlo_baseline, random_baseline, rank_answers, rank_scores, uncertainty, McEstimate};
use relprobe::run::{open_backend, run_probe, ProbeOptions, RESULTS_FILE, REPORT_FILE};
use relprobe::scoring::{
    pll_schedule, score_instance, score_masked, PllStrategy, Reduction, Scope, ScoringConfig, Token,
    TokenizedStatement,
};
use relprobe::statement::instantiate;
use relprobe::synthetic::{bear_shapes, builder_triples, desk_scale_shapes, oracle_truth, shaped_dataset, OracleKind};
use relprobe::BackendError;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within_3_sigma(name: &str, analytic: f64, mc: &McEstimate) -> Result<(), String> {
    ensure(mc.trials >= 100_000, format!("{name}: only {} trials", mc.trials))?;
    let z = (mc.mean - analytic).abs() / mc.stderr;
    ensure(z <= 3.0, format!("{name}: MC {:.5} is {z:.2} sigma from {analytic:.5}", mc.mean))
}

fn check_baseline() -> Check {
    let t = Instant::now();
    if let Ok(dir) = std::env::var("RELPROBE_BEAR_RELEASE") {
        let d = convert_release(&dir, DatasetMetadata::default()).map_err(e2s)?;
        let a = random_baseline(&d).map_err(e2s)?;
        let mc = monte_carlo_baseline(&d, 200_000, 17).map_err(e2s)?;
        let targets = [("overall", Some(a.overall), 0.047), ("1:1", a.one_to_one, 0.017), ("N:1", a.n_to_one, 0.051)];
        for (name, v, want) in targets {
            let v = v.ok_or(format!("{name} subset empty"))?;
            ensure((v - want).abs() <= 0.003, format!("{name} {:.2}% vs {:.1}%", 100.0 * v, 100.0 * want))?;
        }
        within_3_sigma("overall", a.overall, &mc.overall)?;
        within_3_sigma("1:1", a.one_to_one.unwrap(), mc.one_to_one.as_ref().unwrap())?;
        within_3_sigma("N:1", a.n_to_one.unwrap(), mc.n_to_one.as_ref().unwrap())?;
        ensure(t.elapsed() < Duration::from_secs(30), format!("took {:.1?}", t.elapsed()))?;
        return Ok(format!(
            "release: {:.2}% / {:.2}% / {:.2}%, MC within 3 sigma, {:.1?}",
            100.0 * a.overall,
            100.0 * a.one_to_one.unwrap(),
            100.0 * a.n_to_one.unwrap(),
            t.elapsed()
        ));
    }

    // Fixture with the known k-distribution: 14 relations of k=60 (60
    // instances each), 39 of k=25 with 6 per answer, and 7 smaller ones.
    let d = shaped_dataset("bear-shaped", &bear_shapes(), 1);
    let a = random_baseline(&d).map_err(e2s)?;
    let (overall, one, many) = (365.0 / 7726.0, 1.0 / 60.0, 351.0 / 6886.0);
    let exact = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y;
    ensure(exact(a.overall, overall), format!("overall {} != {overall}", a.overall))?;
    ensure(exact(a.one_to_one.unwrap(), one), "1:1 mismatch")?;
    ensure(exact(a.n_to_one.unwrap(), many), "N:1 mismatch")?;
    let mc = monte_carlo_baseline(&d, 200_000, 17).map_err(e2s)?;
    within_3_sigma("overall", overall, &mc.overall)?;
    within_3_sigma("1:1", one, mc.one_to_one.as_ref().unwrap())?;
    within_3_sigma("N:1", many, mc.n_to_one.as_ref().unwrap())?;
    // the published row is 4.7 / 1.7 / 5.1
    for (v, want) in [(overall, 0.047), (one, 0.017), (many, 0.051)] {
        ensure((v - want).abs() <= 0.003, format!("{v} not within 0.3pp of {want}"))?;
    }
    ensure(t.elapsed() < Duration::from_secs(30), format!("took {:.1?}", t.elapsed()))?;
    Ok(format!(
        "fixture (public release not available): analytic {:.2}% / {:.2}% / {:.2}% exact, \
         MC {:.2}% / {:.2}% / {:.2}% ({} trials) within 3 sigma, {:.1?}",
        100.0 * overall,
        100.0 * one,
        100.0 * many,
        100.0 * mc.overall.mean,
        100.0 * mc.one_to_one.unwrap().mean,
        100.0 * mc.n_to_one.unwrap().mean,
        mc.overall.trials,
        t.elapsed()
    ))
}

fn probe_mean(d: &Dataset, scorer: ScorerRef<'_>, cfg: ScoringConfig, parallelism: usize) -> Result<(f64, f64), String> {
    let dir = tempfile::tempdir().map_err(e2s)?;
    let mut opts = ProbeOptions::new(cfg, dir.path());
    opts.parallelism = parallelism;
    let out = run_probe(d, scorer, &opts).map_err(e2s)?;
    let r = out.report.ok_or_else(|| format!("incomplete: {:?}", out.error.map(|e| e.to_string())))?;
    Ok((r.overall.mean, r.overall.stderr))
}

fn check_oracle() -> Check {
    let t = Instant::now();
    let d = shaped_dataset("desk-scale", &desk_scale_shapes(), 3);
    ensure(d.relations.len() == 60, "relation count")?;
    let mut lines = Vec::new();
    for cfg in [
        ScoringConfig::masked(PllStrategy::WithinWordL2r),
        ScoringConfig::causal().with_reduction(Reduction::Mean),
    ] {
        for (kind, want) in [(OracleKind::Correct, 1.0), (OracleKind::Anti, 0.0), (OracleKind::Alternating, 0.5)] {
            let oracle = OracleScorer::new(oracle_truth(&d, kind));
            let view = match cfg.pll_strategy() {
                Some(_) => ScorerRef::Masked(&oracle),
                None => ScorerRef::Causal(&oracle),
            };
            let (mean, stderr) = probe_mean(&d, view, cfg, 8)?;
            ensure(mean == want, format!("{cfg} {kind:?}: {mean} != {want}"))?;
            ensure(stderr == 0.0, format!("{cfg} {kind:?}: stderr {stderr}"))?;
            lines.push(format!("{mean:.3}"));
        }
    }
    ensure(t.elapsed() < Duration::from_secs(60), format!("took {:.1?}", t.elapsed()))?;
    Ok(format!(
        "{} instances: oracle/anti/half = {} (masked and causal), stderr 0, {:.1?} at parallelism 8",
        d.instance_count(),
        lines[..3].join("/"),
        t.elapsed()
    ))
}

fn check_live_server() -> Option<Check> {
    let url = std::env::var("RELPROBE_SERVER_URL").ok()?;
    Some((|| {
        let mode = std::env::var("RELPROBE_SERVER_MODE").unwrap_or_else(|_| "masked".into());
        let cfg = if mode == "causal" {
            ScoringConfig::causal()
        } else {
            ScoringConfig::masked(PllStrategy::WithinWordL2r)
        };
        let mut d = shaped_dataset("desk-scale", &desk_scale_shapes(), 3);
        d.relations = d.relations.into_iter().step_by(12).collect();
        let h = open_backend(&url, cfg.mode, None, 0, ClientOptions::default()).map_err(e2s)?;
        let dir = tempfile::tempdir().map_err(e2s)?;
        let mut opts = ProbeOptions::new(cfg, dir.path());
        opts.parallelism = 4;
        let out = h.with_scorer(cfg.mode, |s| run_probe(&d, s, &opts)).map_err(e2s)?;
        let r = out.report.ok_or_else(|| format!("incomplete: {:?}", out.error))?;
        ensure(r.per_relation.len() == 5, "five relations")?;
        for rel in &r.per_relation {
            ensure((0.0..=1.0).contains(&rel.accuracy), format!("{} accuracy {}", rel.relation_id, rel.accuracy))?;
        }
        let run = relprobe::run::load_run(dir.path()).map_err(e2s)?;
        for rec in &run.records {
            ensure((rec.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9, "probabilities sum")?;
        }
        Ok(format!("{} ({}): overall {:.3}", h.identity().name, url, r.overall.mean))
    })())
}

fn check_pll() -> Check {
    let so: Vec<Token> = ["so", "##uven", "##ir"]
        .iter()
        .enumerate()
        .map(|(i, s)| Token {
            id: i as u32,
            surface: s.to_string(),
            word_index: 0,
            char_start: 0,
            char_end: 8,
        })
        .collect();
    let ts = TokenizedStatement { tokens: so };
    let sets = |s| pll_schedule(&ts, s).into_iter().map(|q| q.masked_positions).collect::<Vec<_>>();
    ensure(sets(PllStrategy::WithinWordL2r) == vec![vec![0, 1, 2], vec![1, 2], vec![2]], "souvenir l2r")?;
    ensure(sets(PllStrategy::Original) == vec![vec![0], vec![1], vec![2]], "souvenir original")?;

    // fuzz: random statements through the real masked scoring path
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyzäöü".chars().collect();
    let scorer = CountingScorer::new(ReferenceScorer::new(1));
    let mut total_tokens = 0;
    for n in 0..1000 {
        let word = |rng: &mut ChaCha8Rng, max: usize| -> String {
            let len = rng.gen_range(1..max);
            (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
        };
        let subject = word(&mut rng, 20);
        let answer = format!("{} {}", word(&mut rng, 15), word(&mut rng, 4));
        let fillers = rng.gen_range(0..5);
        let filler: Vec<String> = (0..fillers).map(|_| word(&mut rng, 9)).collect();
        let template = Template::new(format!("[X] {} [Y]{}", filler.join(" "), if n % 2 == 0 { "." } else { "" }));
        let st = instantiate(&template, &subject, &answer).map_err(e2s)?;
        let tokens = scorer.tokenize(&st.text).map_err(e2s)?;
        let ts = TokenizedStatement { tokens: tokens.clone() };
        for strategy in [PllStrategy::Original, PllStrategy::WithinWordL2r] {
            let schedule = pll_schedule(&ts, strategy);
            ensure(schedule.len() == tokens.len(), format!("statement {n}: {} queries for {} tokens", schedule.len(), tokens.len()))?;
            for (i, q) in schedule.iter().enumerate() {
                ensure(q.target_position == i && q.masked_positions.first() == Some(&i), "target first")?;
                let word_end = (i..tokens.len()).take_while(|&j| tokens[j].word_index == tokens[i].word_index).last().unwrap();
                let want: Vec<usize> = match strategy {
                    PllStrategy::Original => vec![i],
                    PllStrategy::WithinWordL2r => (i..=word_end).collect(),
                };
                ensure(q.masked_positions == want, format!("statement {n} position {i}: {:?}", q.masked_positions))?;
            }
            scorer.reset();
            score_masked(&st, &scorer, &ScoringConfig::masked(strategy)).map_err(e2s)?;
            ensure(scorer.counts().masked_queries == tokens.len(), format!("statement {n}: query count"))?;
        }
        total_tokens += tokens.len();
    }
    Ok(format!("souvenir sets exact; 1000 fuzz statements ({total_tokens} tokens): query counts equal token counts, l2r sets are word suffixes"))
}

fn check_ranking() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 0..10_000 {
        let k = rng.gen_range(1..40);
        // values on a dyadic grid so shifts and scalings stay exact
        let grid = rng.gen_range(1..6);
        let scores: Vec<f64> = (0..k).map(|_| -(rng.gen_range(0..4096 / grid) * grid) as f64 / 64.0).collect();
        let correct = rng.gen_range(0..k);
        let base = rank_scores("x", &scores, correct).map_err(e2s)?;
        let c = rng.gen_range(-1000..1000) as f64 / 8.0;
        let m = [0.25, 0.5, 1.0, 2.0, 3.0, 7.0][rng.gen_range(0..6)];
        for (label, moved) in [
            ("shift", scores.iter().map(|s| s + c).collect::<Vec<_>>()),
            ("scale", scores.iter().map(|s| s * m).collect::<Vec<_>>()),
        ] {
            let r = rank_scores("x", &moved, correct).map_err(e2s)?;
            ensure(
                r.order == base.order && r.rank_of_correct == base.rank_of_correct && r.tie_flag == base.tie_flag,
                format!("vector {n}: {label} changed the ranking"),
            )?;
        }
    }
    let tied = [-1.0, -3.0, -1.0, -1.0, -2.0];
    let first = rank_scores("t", &tied, 2).map_err(e2s)?;
    ensure(first.order == vec![0, 2, 3, 4, 1], format!("tie order {:?}", first.order))?;
    ensure(first.tie_flag && first.rank_of_correct == 2, "tie flag / rank")?;
    for _ in 0..100 {
        ensure(rank_scores("t", &tied, 2).map_err(e2s)? == first, "tie-break not deterministic")?;
    }
    Ok("10000 vectors invariant under +c and x c>0; crafted ties break by answer order".into())
}

/// Whitespace tokens with causal log-probs looked up per word.
struct Table {
    id: BackendIdentity,
    words: BTreeMap<&'static str, Vec<f64>>,
}

impl Backend for Table {
    fn identity(&self) -> &BackendIdentity {
        &self.id
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        let mut out = Vec::new();
        let mut offset = 0;
        for (w, word) in text.split(' ').enumerate() {
            let pieces = self.words.get(word).map_or(1, Vec::len);
            let len = word.chars().count();
            for p in 0..pieces {
                out.push(Token {
                    id: out.len() as u32,
                    surface: format!("{word}#{p}"),
                    word_index: w,
                    char_start: offset + p * len / pieces,
                    char_end: offset + (p + 1) * len / pieces,
                });
            }
            offset += len + 1;
        }
        Ok(out)
    }
}

impl CausalScorer for Table {
    fn causal_logprobs(&self, text: &str) -> Result<Vec<Option<f64>>, BackendError> {
        let mut out: Vec<Option<f64>> = Vec::new();
        for word in text.split(' ') {
            match self.words.get(word) {
                Some(v) => out.extend(v.iter().map(|x| Some(*x))),
                None => out.push(Some(-1.0)),
            }
        }
        out[0] = None;
        Ok(out)
    }
}

fn check_sum_vs_mean() -> Check {
    let table = Table {
        id: BackendIdentity::new("table", "1"),
        words: [("gift", vec![-2.5]), ("souvenir", vec![-3.0, -1.0, -0.1])].into_iter().collect(),
    };
    let rel = Relation {
        id: "R".into(),
        cardinality: Cardinality::NToOne,
        answer_cap: 25,
        popularity_proxy: None,
        templates: vec![Template::new("[X] brought a [Y]")],
        answers: vec![
            Answer {
                answer_id: "A".into(),
                label: "gift".into(),
            },
            Answer {
                answer_id: "B".into(),
                label: "souvenir".into(),
            },
        ],
        instances: vec![Instance {
            instance_id: "I".into(),
            subject_label: "Kim".into(),
            correct_answer_id: "A".into(),
        }],
    };
    let mut winners = Vec::new();
    for reduction in [Reduction::Sum, Reduction::Mean] {
        let cfg = ScoringConfig::causal().with_reduction(reduction).with_scope(Scope::AnswerOnly);
        let recs = score_instance(&rel.instances[0], &rel, 0, ScorerRef::Causal(&table), &cfg).map_err(e2s)?;
        let r = rank_answers(&recs, "A").map_err(e2s)?;
        winners.push(rel.answers[r.predicted_index()].answer_id.clone());
    }
    ensure(winners == ["A", "B"], format!("winners {winners:?}"))?;
    Ok("SUM ranks A (-2.5 vs -4.1) first, MEAN ranks B (-1.367 vs -2.5) first".into())
}

fn check_uncertainty() -> Check {
    let tol = 1e-9;
    for k in 2..=60 {
        let u = uncertainty(&vec![1.0 / k as f64; k]).map_err(e2s)?.unwrap();
        ensure((u - 1.0).abs() < tol, format!("uniform k={k}: {u}"))?;
        let mut point = vec![0.0; k];
        point[k / 2] = 1.0;
        ensure(uncertainty(&point).map_err(e2s)?.unwrap().abs() < tol, "point mass")?;
    }
    let u = uncertainty(&[0.5, 0.25, 0.125, 0.125]).map_err(e2s)?.unwrap();
    ensure((u - 0.875).abs() < tol, format!("dyadic: {u}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let k = rng.gen_range(2..50);
        let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let sum: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / sum).collect();
        let bits = -p.iter().map(|x| x * x.log2()).sum::<f64>() / (k as f64).log2();
        let nats = entropy(&p) / (k as f64).ln();
        ensure((bits - nats).abs() < 1e-12, format!("base dependence {}", (bits - nats).abs()))?;
        ensure((uncertainty(&p).map_err(e2s)?.unwrap() - nats).abs() < 1e-12, "uncertainty vs entropy")?;
    }
    ensure(uncertainty(&[1.0]).map_err(e2s)?.is_none(), "k=1 must be undefined")?;
    let one: f64 = 100.0 / 60.0;
    ensure((one - 1.7).abs() < 0.05, "1/60")?;
    Ok(format!("uniform 1, point 0, dyadic 0.875, bits = nats to 1e-12, k=1 undefined, 1/60 = {one:.2}%"))
}

fn check_builder() -> Check {
    ensure(is_leaky("Apple Watch", "Apple", 0.8), "Apple Watch must leak")?;
    ensure(fuzzy_similarity("Appel", "Apple") == 0.8, format!("sim {}", fuzzy_similarity("Appel", "Apple")))?;
    let (triples, specs) = builder_triples();
    let cfg = BuilderConfig::default();
    let mut built = Vec::new();
    let mut infeasible = Vec::new();
    for (id, spec) in &specs {
        let mine: Vec<RawTriple> = triples.iter().filter(|t| &t.relation_id == id).cloned().collect();
        match build_relation(id, &mine, spec, &cfg, 1) {
            BuildOutcome::Built { relation, .. } => built.push(relation),
            BuildOutcome::Infeasible { relation_id, reason, .. } => infeasible.push(format!("{relation_id} ({})", reason.reason())),
        }
    }
    let d = Dataset {
        metadata: DatasetMetadata::default(),
        relations: built,
    };
    let v = validate_dataset(&d, &ValidationConfig::default());
    let mut n_to_one = 0;
    for r in &d.relations {
        for i in &r.instances {
            for a in &r.answers {
                ensure(!is_leaky(&i.subject_label, &a.label, 0.8), format!("{}: {:?} leaks {:?}", r.id, i.subject_label, a.label))?;
            }
        }
        if r.cardinality == Cardinality::NToOne {
            n_to_one += 1;
            ensure(v.relation(&r.id).unwrap().spread == 0, format!("{} spread", r.id))?;
            ensure(r.answers.len() <= 25, format!("{} answers", r.id))?;
        }
    }
    ensure(n_to_one >= 3, "expected three N:1 relations")?;
    ensure(infeasible.len() == 1 && infeasible[0].starts_with("P740"), format!("infeasible {infeasible:?}"))?;
    // a leaky subject planted in the input must not survive
    ensure(triples.iter().any(|t| t.subject_label.ends_with(" Tower")), "fixture lost its leaky subjects")?;
    Ok(format!(
        "{n_to_one} N:1 relations with spread 0 and <= 25 answers, no leaky pairs, infeasible reported: {}",
        infeasible.join(", ")
    ))
}

fn check_determinism() -> Check {
    let d = shaped_dataset("desk-scale", &desk_scale_shapes(), 3);
    let cfg = ScoringConfig::masked(PllStrategy::Original);
    let dir = tempfile::tempdir().map_err(e2s)?;
    let read = |name: &str| -> Result<(Vec<u8>, Vec<u8>), String> {
        let p = dir.path().join(name);
        Ok((std::fs::read(p.join(RESULTS_FILE)).map_err(e2s)?, std::fs::read(p.join(REPORT_FILE)).map_err(e2s)?))
    };
    let run = |name: &str, scorer: ScorerRef<'_>, parallelism: usize| -> Result<(), String> {
        let mut opts = ProbeOptions::new(cfg, dir.path().join(name));
        opts.parallelism = parallelism;
        opts.seed = 42;
        run_probe(&d, scorer, &opts).map_err(e2s)?.report.map(|_| ()).ok_or("incomplete".into())
    };
    let reference = ReferenceScorer::new(42);
    run("p1", ScorerRef::Masked(&reference), 1)?;
    run("p8", ScorerRef::Masked(&reference), 8)?;
    ensure(read("p1")? == read("p8")?, "parallelism 1 and 8 differ")?;

    let store = CacheStore::open(dir.path().join("cache.jsonl")).map_err(e2s)?;
    let counting = CountingScorer::new(ReferenceScorer::new(42));
    run("cold", ScorerRef::Masked(&CachedScorer::new(&counting, &store)), 8)?;
    let cold_calls = counting.counts().total();
    counting.reset();
    run("warm", ScorerRef::Masked(&CachedScorer::new(&counting, &store)), 8)?;
    ensure(counting.counts().total() == 0, format!("warm run made {} calls", counting.counts().total()))?;
    ensure(read("cold")? == read("p1")? && read("warm")? == read("p1")?, "cached runs differ")?;
    Ok(format!(
        "{} records byte-identical at parallelism 1 and 8; cached rerun: 0 backend calls (cold run {cold_calls})",
        d.instance_count() * 3
    ))
}

fn check_throughput() -> Check {
    let d = shaped_dataset("desk-scale", &desk_scale_shapes(), 3);
    let statements: usize = d.relations.iter().map(|r| r.instances.len() * r.answers.len()).sum();
    let scorer = ReferenceScorer::new(9);
    let parallelism = std::thread::available_parallelism().map_or(4, |n| n.get()).min(8);
    let t = Instant::now();
    let (mean, _) = probe_mean(&d, ScorerRef::Masked(&scorer), ScoringConfig::masked(PllStrategy::WithinWordL2r), parallelism)?;
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(120), format!("took {elapsed:.1?}"))?;
    ensure((0.0..=1.0).contains(&mean), "score range")?;
    Ok(format!(
        "{} instances x 20 answers = {statements} statements per template, 3 templates, {elapsed:.1?} at parallelism {parallelism}",
        d.instance_count()
    ))
}

fn main() {
    // a bare `cargo test` passes harness flags; only `--list` needs handling
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let checks: Vec<(&str, &str, Box<dyn Fn() -> Option<Check>>)> = vec![
        ("1", "random baseline", Box::new(|| Some(check_baseline()))),
        ("2", "end-to-end oracle", Box::new(|| Some(check_oracle()))),
        ("2b", "live server", Box::new(check_live_server)),
        ("3", "PLL schedules", Box::new(|| Some(check_pll()))),
        ("4", "ranking invariance", Box::new(|| Some(check_ranking()))),
        ("5", "sum vs mean", Box::new(|| Some(check_sum_vs_mean()))),
        ("6", "uncertainty identities", Box::new(|| Some(check_uncertainty()))),
        ("7", "dataset builder", Box::new(|| Some(check_builder()))),
        ("8", "determinism and cache", Box::new(|| Some(check_determinism()))),
        ("9", "throughput", Box::new(|| Some(check_throughput()))),
    ];
    let mut failed = 0;
    for (id, name, f) in checks {
        match f() {
            Some(Ok(detail)) => println!("PASS {id:<2} {name}: {detail}"),
            Some(Err(why)) => {
                failed += 1;
                println!("FAIL {id:<2} {name}: {why}");
            }
            None => println!("SKIP {id:<2} {name}: set RELPROBE_SERVER_URL to run"),
        }
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
