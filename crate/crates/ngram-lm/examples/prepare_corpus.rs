//! Turn messy raw text into a clean corpus ready for counting, then
//! carve it into train/test portions and fixed-size subsets.
//!
//! Run with: cargo run --example prepare_corpus

use ngram_lm::prep::{corpus_stats, make_subsets, prepare, split_train_test, PrepConfig};

fn main() -> anyhow::Result<()> {
    // Raw input as it might arrive from a scraped dump: markup lines,
    // numeric tables, inline decoration, duplicates, abbreviations
    // whose periods must not end a sentence, and stray punctuation.
    let raw: Vec<String> = [
        "== Daily log ==",
        "The reactor ran warm today. Dr. Chen logged every reading, twice!",
        "[[infobox|status]] green * stable # nominal",
        "417 2984 33 7",
        "The reactor ran warm today. Dr. Chen logged every reading, twice!",
        "\u{201c}Coolant first,\u{201d} she said; the rest can wait.",
        "Flow stayed near the no. 4 limit. Pressure did not.",
        "ok",
        "Pumps two and three held steady through the night shift.",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();

    println!("--- raw input ({} lines) ---", raw.len());
    for line in &raw {
        println!("  {line}");
    }

    // The pipeline: strip markup lines and decoration, split into
    // sentences (abbreviation-aware), drop punctuation, drop sentences
    // shorter than min_tokens, then deduplicate and shuffle by seeded
    // content hash so the order is stable across machines and reruns.
    let config = PrepConfig::default();
    let corpus = prepare(&raw, &config);

    let stats = corpus_stats(&corpus);
    println!(
        "\n--- prepared corpus ({} sentences, {} words) ---",
        stats.sentences, stats.words
    );
    for sentence in &corpus {
        println!("  {}", sentence.join(" "));
    }

    // Preparing an already-prepared corpus with the same config is a
    // no-op, so pipelines can safely re-run.
    let again = prepare(
        &corpus.iter().map(|s| s.join(" ")).collect::<Vec<_>>(),
        &config,
    );
    assert_eq!(again, corpus);
    println!("\nre-preparing the output reproduces it exactly (idempotent)");

    // Carve a held-out test set, then disjoint training subsets of
    // fixed sizes from what remains.
    let (train, test) = split_train_test(&corpus, 0.25, 7)?;
    println!(
        "\nsplit: {} train / {} test sentences (fraction 0.25, seed 7)",
        train.len(),
        test.len()
    );

    let subsets = make_subsets(&train, &[1, 2])?;
    for subset in &subsets {
        println!("subset of {}:", subset.len());
        for sentence in subset {
            println!("  {}", sentence.join(" "));
        }
    }
    Ok(())
}
