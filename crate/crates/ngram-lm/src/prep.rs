//! Text preparation: line cleaning, sentence segmentation, punctuation
//! stripping, deduplication, seeded shuffling, and train/test splitting.
//!
//! The pipeline stages run in a fixed order:
//!
//! 1. [`clean_lines`] drops unwanted raw lines
//! 2. [`split_sentences`] segments each line at `.`, `!`, `?`
//! 3. [`strip_punctuation`] removes punctuation from each sentence
//! 4. whitespace tokenization
//! 5. sentences without an alphabetic character are dropped (the
//!    tokenized mirror of the line rule, so the pipeline is a fixed
//!    point on its own output)
//! 6. [`filter_short`] drops sentences below the token minimum
//! 7. [`dedupe_and_shuffle`] removes duplicates and orders the survivors
//!    by a seeded content hash
//!
//! Sentence splitting has to happen before punctuation stripping, since
//! the sentence terminators are themselves punctuation.
//!
//! The output interchange format is plain UTF-8, one sentence per line,
//! tokens separated by single spaces.

use std::collections::{BTreeSet, HashSet};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

/// A tokenized sentence in interchange form.
pub type Sentence = Vec<String>;

#[derive(Debug, Error)]
pub enum PrepError {
    #[error("test fraction {0} is outside (0, 1)")]
    BadFraction(f64),
    #[error("cannot split {n} sentences at fraction {fraction}: one side would be empty")]
    SplitTooSmall { n: usize, fraction: f64 },
    #[error(
        "subsets need {needed} sentences but only {available} are available ({shortfall} short)"
    )]
    InsufficientTraining {
        needed: usize,
        available: usize,
        shortfall: usize,
    },
    #[error("subset sizes must be strictly ascending and nonzero, got {0:?}")]
    BadSubsetSizes(Vec<usize>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Line-level filter rules for [`clean_lines`].
#[derive(Debug, Clone)]
pub struct CleanRules {
    /// A line whose first non-space character is in this set is dropped
    /// as markup.
    pub markup_markers: BTreeSet<char>,
}

impl Default for CleanRules {
    fn default() -> Self {
        CleanRules {
            markup_markers: "|{}[]*#=<>:;!".chars().collect(),
        }
    }
}

/// Full pipeline configuration with the documented defaults.
#[derive(Debug, Clone)]
pub struct PrepConfig {
    pub rules: CleanRules,
    /// Characters stripped in addition to the Unicode punctuation
    /// categories. The default covers the markup markers that Unicode
    /// classifies as symbols rather than punctuation.
    pub punct_extra: BTreeSet<char>,
    /// Lowercased abbreviation forms whose trailing period does not end a
    /// sentence.
    pub abbreviations: BTreeSet<String>,
    pub min_tokens: usize,
    pub seed: u64,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            rules: CleanRules::default(),
            punct_extra: "=<>|".chars().collect(),
            abbreviations: ["dr", "no", "tgl"].iter().map(|s| s.to_string()).collect(),
            min_tokens: 2,
            seed: 0,
        }
    }
}

/// Sentence and word totals of a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusStats {
    pub sentences: usize,
    pub words: usize,
}

/// Count sentences and words (sum of token counts).
pub fn corpus_stats(sentences: &[Sentence]) -> CorpusStats {
    CorpusStats {
        sentences: sentences.len(),
        words: sentences.iter().map(|s| s.len()).sum(),
    }
}

fn has_alphabetic(s: &str) -> bool {
    s.chars().any(char::is_alphabetic)
}

/// Drop unwanted lines: blank lines, lines without an alphabetic
/// character, and lines starting with a markup marker. Order is
/// preserved.
pub fn clean_lines(lines: &[String], rules: &CleanRules) -> Vec<String> {
    lines
        .iter()
        .filter(|line| {
            let trimmed = line.trim();
            if trimmed.is_empty() || !has_alphabetic(trimmed) {
                return false;
            }
            let first = trimmed.chars().next().unwrap();
            !rules.markup_markers.contains(&first)
        })
        .cloned()
        .collect()
}

/// Split a paragraph at `.`, `!` or `?` followed by whitespace or end of
/// line. A period does not split when the word before it is a known
/// abbreviation. Terminators stay attached to their sentence; empty
/// fragments are dropped.
pub fn split_sentences(paragraph: &str, abbreviations: &BTreeSet<String>) -> Vec<String> {
    let chars: Vec<char> = paragraph.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;

    for i in 0..chars.len() {
        let c = chars[i];
        if c != '.' && c != '!' && c != '?' {
            continue;
        }
        let at_break = match chars.get(i + 1) {
            None => true,
            Some(next) => next.is_whitespace(),
        };
        if !at_break {
            continue;
        }
        if c == '.' && preceding_word_is_abbreviation(&chars[start..i], abbreviations) {
            continue;
        }
        let sentence: String = chars[start..=i].iter().collect();
        let sentence = sentence.trim();
        if !sentence.is_empty() {
            sentences.push(sentence.to_string());
        }
        start = i + 1;
    }

    if start < chars.len() {
        let tail: String = chars[start..].iter().collect();
        let tail = tail.trim();
        if !tail.is_empty() {
            sentences.push(tail.to_string());
        }
    }
    sentences
}

fn preceding_word_is_abbreviation(before: &[char], abbreviations: &BTreeSet<String>) -> bool {
    let word: String = before
        .iter()
        .rev()
        .take_while(|c| c.is_alphabetic())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    if word.is_empty() {
        return false;
    }
    abbreviations.contains(&word.to_lowercase())
}

fn is_punct(c: char, extra: &BTreeSet<char>) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation || extra.contains(&c)
}

/// Replace punctuation with spaces, collapse runs of whitespace to single
/// spaces, and trim.
pub fn strip_punctuation(line: &str, extra: &BTreeSet<char>) -> String {
    let replaced: String = line
        .chars()
        .map(|c| if is_punct(c, extra) { ' ' } else { c })
        .collect();
    replaced.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Keep sentences with at least `min_tokens` tokens, preserving order.
pub fn filter_short(sentences: Vec<Sentence>, min_tokens: usize) -> Vec<Sentence> {
    sentences
        .into_iter()
        .filter(|s| s.len() >= min_tokens)
        .collect()
}

fn shuffle_key(seed: u64, sentence: &[String]) -> u128 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for token in sentence {
        hasher.update(token.as_bytes());
        hasher.update([0x1f]);
    }
    let digest = hasher.finalize();
    u128::from_le_bytes(digest[..16].try_into().unwrap())
}

/// Remove duplicate sentences (first occurrence wins) and order the
/// survivors by a seeded content hash.
///
/// Hash ordering rather than an in-place shuffle keeps the operation a
/// fixed point: rerunning it on its own output with the same seed
/// reproduces the output byte for byte, which position-based shuffling
/// cannot do.
pub fn dedupe_and_shuffle(sentences: Vec<Sentence>, seed: u64) -> Vec<Sentence> {
    let mut seen: HashSet<Sentence> = HashSet::with_capacity(sentences.len());
    let mut distinct: Vec<Sentence> = Vec::with_capacity(sentences.len());
    for s in sentences {
        if !seen.contains(&s) {
            seen.insert(s.clone());
            distinct.push(s);
        }
    }
    // stable sort: hash collisions (if any) keep first-occurrence order
    distinct.sort_by_cached_key(|s| shuffle_key(seed, s));
    distinct
}

/// Reorder sentences by seeded content hash without deduplicating.
/// Duplicate sentences stay adjacent in input order.
pub fn shuffle_sentences(mut sentences: Vec<Sentence>, seed: u64) -> Vec<Sentence> {
    sentences.sort_by_cached_key(|s| shuffle_key(seed, s));
    sentences
}

/// Partition sentences into train and test sides. The test side holds
/// `round(fraction * n)` sentences chosen by a seeded index shuffle; both
/// sides keep their relative input order.
pub fn split_train_test(
    sentences: &[Sentence],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<Sentence>, Vec<Sentence>), PrepError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(PrepError::BadFraction(fraction));
    }
    let n = sentences.len();
    let n_test = (fraction * n as f64).round() as usize;
    if n_test == 0 || n_test >= n {
        return Err(PrepError::SplitTooSmall { n, fraction });
    }

    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let test_set: HashSet<usize> = indices[..n_test].iter().copied().collect();

    let mut train = Vec::with_capacity(n - n_test);
    let mut test = Vec::with_capacity(n_test);
    for (i, s) in sentences.iter().enumerate() {
        if test_set.contains(&i) {
            test.push(s.clone());
        } else {
            train.push(s.clone());
        }
    }
    Ok((train, test))
}

/// Carve pairwise-disjoint subsets of the requested sizes from the front
/// of the (already shuffled) training list.
pub fn make_subsets(train: &[Sentence], sizes: &[usize]) -> Result<Vec<Vec<Sentence>>, PrepError> {
    if sizes.first() == Some(&0) || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PrepError::BadSubsetSizes(sizes.to_vec()));
    }
    let needed: usize = sizes.iter().sum();
    if needed > train.len() {
        return Err(PrepError::InsufficientTraining {
            needed,
            available: train.len(),
            shortfall: needed - train.len(),
        });
    }
    let mut subsets = Vec::with_capacity(sizes.len());
    let mut offset = 0;
    for &size in sizes {
        subsets.push(train[offset..offset + size].to_vec());
        offset += size;
    }
    Ok(subsets)
}

/// Run the full preparation pipeline on raw paragraph lines.
pub fn prepare(lines: &[String], config: &PrepConfig) -> Vec<Sentence> {
    let cleaned = clean_lines(lines, &config.rules);
    let mut sentences: Vec<Sentence> = Vec::new();
    for line in &cleaned {
        for raw_sentence in split_sentences(line, &config.abbreviations) {
            let stripped = strip_punctuation(&raw_sentence, &config.punct_extra);
            if !has_alphabetic(&stripped) {
                continue;
            }
            let tokens: Sentence = stripped.split_whitespace().map(str::to_string).collect();
            if !tokens.is_empty() {
                sentences.push(tokens);
            }
        }
    }
    let sentences = filter_short(sentences, config.min_tokens);
    dedupe_and_shuffle(sentences, config.seed)
}

/// Read raw lines, replacing undecodable byte sequences with U+FFFD.
/// Returns the lines and the number of lines that needed replacement.
pub fn read_lines_lossy<R: BufRead>(mut reader: R) -> Result<(Vec<String>, usize), PrepError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let mut lines = Vec::new();
    let mut replaced = 0usize;
    for raw in bytes.split(|&b| b == b'\n') {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        match String::from_utf8_lossy(raw) {
            std::borrow::Cow::Borrowed(s) => lines.push(s.to_string()),
            std::borrow::Cow::Owned(s) => {
                replaced += 1;
                lines.push(s);
            }
        }
    }
    // a trailing newline produces one empty tail entry, not a line
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    Ok((lines, replaced))
}

/// Parse interchange-format text (one sentence per line). Blank lines are
/// skipped.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<Sentence>, PrepError> {
    let mut sentences = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let tokens: Sentence = line.split_whitespace().map(str::to_string).collect();
        if !tokens.is_empty() {
            sentences.push(tokens);
        }
    }
    Ok(sentences)
}

/// Write interchange-format text: one sentence per line, single spaces,
/// newline-terminated.
pub fn write_corpus<W: Write>(mut sink: W, sentences: &[Sentence]) -> Result<(), PrepError> {
    for s in sentences {
        writeln!(sink, "{}", s.join(" "))?;
    }
    Ok(())
}
