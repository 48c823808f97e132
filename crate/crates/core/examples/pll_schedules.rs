//! Show which positions each pseudo-log-likelihood strategy masks.
//!
//!     cargo run --example pll_schedules -- "The souvenirs were gifts."

use relprobe::backends::{Backend, ReferenceScorer};
use relprobe::scoring::{pll_schedule, PllStrategy, Token, TokenizedStatement};

fn show(tokens: &[Token], strategy: PllStrategy) {
    let ts = TokenizedStatement {
        tokens: tokens.to_vec(),
    };
    println!("{}:", strategy.as_str());
    for q in pll_schedule(&ts, strategy) {
        let view: Vec<&str> = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| if q.masked_positions.contains(&i) { "[MASK]" } else { t.surface.as_str() })
            .collect();
        println!("  score {:>8} | {}", tokens[q.target_position].surface, view.join(" "));
    }
}

fn main() {
    // the subword split of "souvenir" used to motivate within-word masking
    let souvenir: Vec<Token> = ["so", "##uven", "##ir"]
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
    show(&souvenir, PllStrategy::Original);
    show(&souvenir, PllStrategy::WithinWordL2r);

    let text = std::env::args().nth(1).unwrap_or_else(|| "The souvenirs were gifts.".into());
    let tokens = ReferenceScorer::new(0).tokenize(&text).expect("reference tokenizer");
    println!("\n{text:?} under the reference tokenizer:");
    show(&tokens, PllStrategy::WithinWordL2r);
}
