//! Train a Kneser-Ney trigram model and walk through how it scores a
//! sentence: per-word conditional probabilities, backoff through
//! shorter histories, out-of-vocabulary handling, and the perplexity
//! report.
//!
//! Run with: cargo run --example train_and_score

use ngram_lm::prep::Sentence;
use ngram_lm::{train_model, BuildOptions, Method, Score, WordId};

fn sent(s: &str) -> Sentence {
    s.split_whitespace().map(str::to_string).collect()
}

fn main() -> anyhow::Result<()> {
    let corpus: Vec<Sentence> = [
        "the pump feeds the main loop",
        "the pump feeds the backup loop",
        "the valve vents the main loop",
        "a sensor reads the loop pressure",
        "the pump stalled under load",
        "a valve stuck under load",
        "the sensor logged the fault",
        "an operator reset the pump",
        "the operator checked the valve",
        "a technician replaced the sensor",
    ]
    .iter()
    .map(|s| sent(s))
    .collect();

    let model = train_model(&corpus, 3, &BuildOptions::new(Method::KneserNey))?;
    println!(
        "trained an order-{} Kneser-Ney model on {} sentences\n",
        model.order(),
        corpus.len()
    );

    // Score one sentence event by event. Every event conditions on the
    // begin marker plus all preceding tokens; the model itself decides
    // how much of that history it can actually use.
    let sentence = sent("the pump vents the loop");
    let vocab = model.vocab();
    let mut padded = vec![WordId::BOS];
    padded.extend(sentence.iter().map(|t| vocab.id_or_unk(t)));
    padded.push(WordId::EOS);

    println!("word-by-word scores for: {}", sentence.join(" "));
    for i in 1..padded.len() {
        let context: Vec<&str> = padded[..i].iter().map(|&id| vocab.word(id)).collect();
        match (
            model.score(&padded[..i], padded[i]),
            model.prob(&padded[..i], padded[i]),
        ) {
            (Score::LogProb(lp), Score::LogProb(p)) => println!(
                "  P({} | {}) = {:.6}   (log10 {:+.4})",
                vocab.word(padded[i]),
                context.join(" "),
                p,
                lp
            ),
            _ => println!(
                "  {} is out of vocabulary: skipped and tallied",
                vocab.word(padded[i])
            ),
        }
    }

    // Out-of-vocabulary words never receive probability mass. They are
    // skipped as prediction targets but stay visible as context, where
    // they force the model down to shorter histories.
    let test = vec![
        sent("the pump feeds the backup loop"),
        sent("a flywheel feeds the loop"), // "flywheel" is unseen
        sent("the operator reset the valve"),
    ];
    let report = model.perplexity(&test)?;
    println!("\nperplexity over {} test sentences:", report.sentences);
    println!("  scored words   {}", report.words);
    println!("  oov skipped    {}", report.oov);
    println!("  log10 prob     {:.4}", report.logprob10);
    println!("  entropy (bits) {:.4}", report.entropy_bits);
    println!("  perplexity     {:.4}", report.ppl);

    Ok(())
}
