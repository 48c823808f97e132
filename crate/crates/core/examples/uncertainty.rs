//! Ranking, softmax probabilities and normalized-entropy uncertainty for a
//! few hand-picked score vectors.

use relprobe::metrics::{rank_scores, uncertainty};

fn main() -> relprobe::Result<()> {
    let cases: [(&str, Vec<f64>); 4] = [
        ("confident", vec![-1.0, -9.0, -12.0, -10.5]),
        ("torn", vec![-4.0, -4.1, -9.0, -9.0]),
        ("tied", vec![-3.0, -3.0, -3.0, -3.0]),
        ("single answer", vec![-2.0]),
    ];
    for (name, scores) in cases {
        let r = rank_scores(name, &scores, 0)?;
        let probs: Vec<String> = r.probabilities.iter().map(|p| format!("{p:.3}")).collect();
        println!(
            "{name:<14} rank {} tie={} p=[{}] uncertainty={}",
            r.rank_of_correct,
            r.tie_flag,
            probs.join(", "),
            r.uncertainty.map_or("undefined".into(), |u| format!("{u:.3}"))
        );
    }
    println!("[.5 .25 .125 .125] -> {:?}", uncertainty(&[0.5, 0.25, 0.125, 0.125])?);
    Ok(())
}
