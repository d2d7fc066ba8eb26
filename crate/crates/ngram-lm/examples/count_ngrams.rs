//! Count exact n-gram statistics for a small corpus and inspect the
//! tables smoothing is estimated from: per-order totals, the most
//! frequent grams, count-of-count histograms, and follower statistics.
//!
//! Run with: cargo run --example count_ngrams

use ngram_lm::prep::Sentence;
use ngram_lm::{count_ngrams, Vocabulary};

fn sent(s: &str) -> Sentence {
    s.split_whitespace().map(str::to_string).collect()
}

fn main() -> anyhow::Result<()> {
    let corpus: Vec<Sentence> = [
        "the cat sat on the mat",
        "the cat saw the dog",
        "the dog sat on the rug",
        "a cat and a dog met on the rug",
        "the dog saw the cat first",
    ]
    .iter()
    .map(|s| sent(s))
    .collect();

    let vocab = Vocabulary::from_corpus(&corpus)?;
    let order = 3;
    let counts = count_ngrams(&corpus, &vocab, order)?;
    println!(
        "vocabulary: {} entries (including the <s>, </s> and <unk> markers)",
        vocab.len()
    );

    // Every sentence is padded with one begin and one end marker, so
    // an L-word sentence contributes L+1 unigram prediction events.
    for k in 1..=order {
        println!(
            "order {k}: {} distinct grams, {} tokens",
            counts.num_types(k),
            counts.token_total(k)
        );
    }

    for k in 1..=order {
        let mut grams: Vec<(Vec<&str>, u64)> = counts
            .grams(k)
            .map(|(g, c)| (g.iter().map(|&id| vocab.word(id)).collect(), c))
            .collect();
        grams.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        println!("\nmost frequent {k}-grams:");
        for (gram, c) in grams.iter().take(5) {
            println!("  {:>3}  {}", c, gram.join(" "));
        }
    }

    // The count-of-counts histogram (how many grams occurred exactly
    // once, twice, ...) is what the Kneser-Ney discounts are fitted on.
    println!();
    for k in 1..=order {
        let h = counts.count_of_counts(k);
        println!(
            "order {k} histogram: n1={} n2={} n3={} n4={}",
            h.n1, h.n2, h.n3, h.n4
        );
    }

    // Follower statistics for one context: how many distinct words
    // were seen after it, and in which frequency class. Witten-Bell
    // reserves mass proportional to the distinct-follower count.
    let context: Vec<_> = ["the"].iter().map(|t| vocab.id_or_unk(t)).collect();
    let f = counts.follower_stats(&context);
    println!(
        "\nafter \"the\": {} distinct followers ({} once, {} twice, {} three+ times)",
        f.n1_plus, f.n1, f.n2, f.n3_plus
    );

    Ok(())
}
