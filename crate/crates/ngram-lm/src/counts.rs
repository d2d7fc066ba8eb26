//! Exact n-gram statistics: raw counts over padded sentences,
//! count-of-counts, follower and continuation statistics, and OOV
//! accounting.
//!
//! Each sentence `w1 … wL` is padded as `<s> w1 … wL </s>` — one
//! begin marker of pure context and one end marker that is a predicted
//! event, so a sentence contributes `L + 1` prediction events. The
//! `<s>` unigram is recorded (it is a context other orders need) but is
//! never treated as a predictable event by the smoothing layer.

use std::collections::HashMap;
use std::io::Write;

use thiserror::Error;

use crate::prep::Sentence;
use crate::vocab::{Vocabulary, WordId};

#[derive(Debug, Error)]
pub enum CountError {
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error("training token {0:?} is not in the vocabulary")]
    UnknownToken(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sparse per-order n-gram counts. Absent grams have count 0.
#[derive(Debug, Clone)]
pub struct NGramCountTable {
    order: usize,
    // tables[k-1] maps k-length id sequences to counts
    tables: Vec<HashMap<Box<[WordId]>, u64>>,
}

/// `n_j` = number of distinct grams of one order with count exactly `j`,
/// for j = 1..4 (all the discount estimator needs).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CountHistogram {
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
    pub n4: u64,
}

/// Follower statistics for one context `u`.
///
/// `n1_plus` is the number of distinct words following `u`; `n1` and
/// `n2` count followers seen exactly once and twice; `n3_plus` counts
/// followers seen three or more times, which is the class the third
/// discount applies to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FollowerStats {
    pub n1_plus: u64,
    pub n1: u64,
    pub n2: u64,
    pub n3_plus: u64,
}

/// Pad a sentence with the begin and end markers.
pub fn pad_sentence(ids: &[WordId]) -> Vec<WordId> {
    let mut padded = Vec::with_capacity(ids.len() + 2);
    padded.push(WordId::BOS);
    padded.extend_from_slice(ids);
    padded.push(WordId::EOS);
    padded
}

fn count_into(tables: &mut [HashMap<Box<[WordId]>, u64>], padded: &[WordId]) {
    for k in 1..=tables.len() {
        if padded.len() < k {
            continue;
        }
        for window in padded.windows(k) {
            *tables[k - 1].entry(window.into()).or_insert(0) += 1;
        }
    }
}

fn merge_tables(
    mut a: Vec<HashMap<Box<[WordId]>, u64>>,
    b: Vec<HashMap<Box<[WordId]>, u64>>,
) -> Vec<HashMap<Box<[WordId]>, u64>> {
    for (dst, src) in a.iter_mut().zip(b) {
        for (gram, c) in src {
            *dst.entry(gram).or_insert(0) += c;
        }
    }
    a
}

// below this many sentences the rayon fold/reduce overhead is not worth it
const PARALLEL_THRESHOLD: usize = 4096;

/// Count every k-gram window (k = 1..=order) over the padded id
/// sentences. Large corpora are counted in parallel shards; shard
/// merging is plain addition, so the result is independent of sharding.
pub fn count_padded(corpus: &[Vec<WordId>], order: usize) -> Result<NGramCountTable, CountError> {
    if order == 0 {
        return Err(CountError::ZeroOrder);
    }
    let fresh = || vec![HashMap::new(); order];
    let tables = if corpus.len() < PARALLEL_THRESHOLD {
        let mut tables = fresh();
        for ids in corpus {
            count_into(&mut tables, &pad_sentence(ids));
        }
        tables
    } else {
        use rayon::prelude::*;
        corpus
            .par_chunks(1024)
            .fold(fresh, |mut tables, chunk| {
                for ids in chunk {
                    count_into(&mut tables, &pad_sentence(ids));
                }
                tables
            })
            .reduce(fresh, merge_tables)
    };
    Ok(NGramCountTable { order, tables })
}

/// Count n-grams of a training corpus. Every token must already be in
/// the vocabulary: training text defines the vocabulary, so an unknown
/// token here is caller error, not OOV.
pub fn count_ngrams(
    sentences: &[Sentence],
    vocab: &Vocabulary,
    order: usize,
) -> Result<NGramCountTable, CountError> {
    let mut corpus = Vec::with_capacity(sentences.len());
    for sentence in sentences {
        let mut ids = Vec::with_capacity(sentence.len());
        for token in sentence {
            let id = vocab
                .id(token)
                .ok_or_else(|| CountError::UnknownToken(token.clone()))?;
            ids.push(id);
        }
        corpus.push(ids);
    }
    count_padded(&corpus, order)
}

impl NGramCountTable {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Count of one gram; 0 when absent or longer than the table order.
    pub fn count(&self, gram: &[WordId]) -> u64 {
        match self.tables.get(gram.len().wrapping_sub(1)) {
            Some(table) => table.get(gram).copied().unwrap_or(0),
            None => 0,
        }
    }

    /// Iterate all stored grams of order k.
    pub fn grams(&self, k: usize) -> impl Iterator<Item = (&[WordId], u64)> {
        self.tables[k - 1].iter().map(|(g, &c)| (g.as_ref(), c))
    }

    /// Number of distinct grams of order k.
    pub fn num_types(&self, k: usize) -> usize {
        self.tables[k - 1].len()
    }

    /// Sum of counts over all grams of order k.
    pub fn token_total(&self, k: usize) -> u64 {
        self.tables[k - 1].values().sum()
    }

    /// Histogram n₁..n₄ of the order-k counts.
    pub fn count_of_counts(&self, k: usize) -> CountHistogram {
        histogram(self.tables[k - 1].values().copied())
    }

    /// Exact follower statistics for a context (order |context| + 1).
    /// Unseen contexts yield all-zero stats.
    pub fn follower_stats(&self, context: &[WordId]) -> FollowerStats {
        let k = context.len() + 1;
        if k > self.order {
            return FollowerStats::default();
        }
        follower_stats_of(
            self.tables[k - 1]
                .iter()
                .filter(|(g, _)| &g[..context.len()] == context)
                .map(|(_, &c)| c),
        )
    }

    /// Σ over all words w of c(context · w).
    pub fn context_total(&self, context: &[WordId]) -> u64 {
        let k = context.len() + 1;
        if k > self.order {
            return 0;
        }
        self.tables[k - 1]
            .iter()
            .filter(|(g, _)| &g[..context.len()] == context)
            .map(|(_, &c)| c)
            .sum()
    }

    /// Left-continuation count N₁₊(·v): distinct words preceding v.
    pub fn left_continuation(&self, suffix: &[WordId]) -> u64 {
        let k = suffix.len() + 1;
        if k > self.order {
            return 0;
        }
        self.tables[k - 1]
            .keys()
            .filter(|g| &g[1..] == suffix)
            .count() as u64
    }

    /// Continuation counts for order k: for each k-gram g, the number of
    /// distinct words x with c(x·g) > 0. Grams starting with `<s>` keep
    /// their raw counts — nothing can precede a sentence start, so their
    /// continuation count would always be zero.
    pub fn continuation_counts(&self, k: usize) -> HashMap<Box<[WordId]>, u64> {
        assert!(k < self.order, "continuation counts need order k+1 counts");
        let mut modified: HashMap<Box<[WordId]>, u64> =
            HashMap::with_capacity(self.tables[k - 1].len());
        for gram in self.tables[k].keys() {
            *modified.entry(gram[1..].into()).or_insert(0) += 1;
        }
        for (gram, &raw) in &self.tables[k - 1] {
            if gram[0] == WordId::BOS {
                modified.insert(gram.clone(), raw);
            }
        }
        modified
    }

    /// Dump all stored grams as `w1 … wk<TAB>count` lines, sorted
    /// lexicographically by token sequence across every order.
    pub fn dump<W: Write>(&self, vocab: &Vocabulary, mut sink: W) -> Result<(), CountError> {
        let mut rows: Vec<(Vec<&str>, u64)> = Vec::new();
        for k in 1..=self.order {
            for (gram, c) in self.grams(k) {
                let tokens: Vec<&str> = gram.iter().map(|&id| vocab.word(id)).collect();
                rows.push((tokens, c));
            }
        }
        rows.sort();
        for (tokens, c) in rows {
            writeln!(sink, "{}\t{}", tokens.join(" "), c)?;
        }
        Ok(())
    }
}

/// Histogram of an arbitrary count sequence.
pub fn histogram(counts: impl Iterator<Item = u64>) -> CountHistogram {
    let mut h = CountHistogram::default();
    for c in counts {
        match c {
            1 => h.n1 += 1,
            2 => h.n2 += 1,
            3 => h.n3 += 1,
            4 => h.n4 += 1,
            _ => {}
        }
    }
    h
}

/// Follower statistics of an arbitrary follower-count sequence.
pub fn follower_stats_of(counts: impl Iterator<Item = u64>) -> FollowerStats {
    let mut s = FollowerStats::default();
    for c in counts {
        debug_assert!(c > 0, "stored counts are positive");
        s.n1_plus += 1;
        match c {
            1 => s.n1 += 1,
            2 => s.n2 += 1,
            _ => s.n3_plus += 1,
        }
    }
    s
}

/// Count test tokens outside the vocabulary. Returns (oov, total) over
/// surface tokens only; boundary markers are not tallied on either side.
pub fn oov_count(vocab: &Vocabulary, test: &[Sentence]) -> (u64, u64) {
    let mut oov = 0u64;
    let mut total = 0u64;
    for sentence in test {
        for token in sentence {
            total += 1;
            if !vocab.contains(token) {
                oov += 1;
            }
        }
    }
    (oov, total)
}
