//! Serialize a model to the ARPA text format and read it back without
//! losing a bit of scoring behavior. The format is the interchange
//! lingua franca of n-gram toolkits: log10 probabilities, one section
//! per order, optional backoff weights on non-final orders.
//!
//! Run with: cargo run --example arpa_roundtrip

use ngram_lm::arpa::{read_arpa_str, write_arpa_string};
use ngram_lm::prep::Sentence;
use ngram_lm::{load_arpa, save_arpa, train_model, BuildOptions, Method};

fn sent(s: &str) -> Sentence {
    s.split_whitespace().map(str::to_string).collect()
}

fn main() -> anyhow::Result<()> {
    let corpus: Vec<Sentence> = ["a b", "a b", "a c", "b a", "c a b"]
        .iter()
        .map(|s| sent(s))
        .collect();
    let model = train_model(&corpus, 2, &BuildOptions::new(Method::WittenBell))?;

    // The whole model as ARPA text. <s> carries the conventional -99
    // stand-in (it is never a prediction target); third columns are
    // backoff weights for contexts that need them.
    let text = write_arpa_string(&model)?;
    println!("--- ARPA serialization ---\n{text}");

    let reloaded = read_arpa_str(&text)?;
    let test = vec![sent("a b"), sent("c a"), sent("b a c")];
    let before = model.perplexity(&test)?;
    let after = reloaded.perplexity(&test)?;
    println!("perplexity before round-trip: {:.12}", before.ppl);
    println!("perplexity after  round-trip: {:.12}", after.ppl);
    assert!(((before.ppl - after.ppl) / before.ppl).abs() < 1e-9);
    println!("relative drift is below 1e-9\n");

    // The same works through files on disk.
    let dir = std::env::temp_dir().join("ngram-lm-arpa-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("bigram.lm");
    let bytes = save_arpa(&model, &path)?;
    let from_disk = load_arpa(&path)?;
    println!("wrote {} bytes to {}", bytes, path.display());
    println!(
        "reloaded model scores the test set at perplexity {:.12}",
        from_disk.perplexity(&test)?.ppl
    );

    Ok(())
}
