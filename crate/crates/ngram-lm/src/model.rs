//! Backoff model assembly, scoring, and perplexity evaluation.
//!
//! A backoff model stores, per order k, log₁₀ probabilities for seen
//! k-grams and, per order k < n, log₁₀ backoff weights α for contexts
//! with stored continuations. Scoring uses the standard backoff rule:
//! a stored gram contributes its probability; otherwise the context's
//! backoff weight (1 when absent) scales the next-shorter lookup, down
//! to the unigram base.
//!
//! Assembly invariant: for every context u, Σ over the full event
//! vocabulary of P(w|u) = 1. The backoff weight that achieves it is
//! α(u) = γ_mass(u) / (1 − Σ_{stored w} P(w|suffix(u))). Entries whose
//! discounted probability is exactly 0 are not stored (their mass is
//! already in γ); when a removed entry is still needed as the carrier
//! of a backoff weight, it is re-added with its backoff-computed value,
//! which leaves every lookup unchanged. A context whose stored
//! followers exhaust the lower-order mass has no unseen mass to scale,
//! so its stored probabilities are rescaled by 1/(1 − γ_mass) instead
//! of receiving a backoff weight.

use std::collections::HashMap;

use thiserror::Error;

use crate::counts::{histogram, NGramCountTable};
use crate::prep::Sentence;
use crate::smoothing::{
    estimate_discounts, lowest_order_distribution, mkn_smooth, wb_smooth, Discounts, Method,
    SmoothError, SmoothedOrder,
};
use crate::vocab::{Vocabulary, WordId};

/// Conventional log₁₀ stand-in for probability zero (the begin marker).
pub const LOG10_ZERO: f64 = -99.0;

// Backoff weight given to a context whose reserved mass is exactly zero;
// keeps every probability strictly positive.
const ALPHA_FLOOR: f64 = 1e-10;

// Below this leftover mass a context is treated as having no unseen
// probability left to scale.
const DEGENERATE_DENOM: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("cannot build a model from an empty corpus")]
    EmptyCorpus,
    #[error(transparent)]
    Smooth(#[from] SmoothError),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no evaluable events (every test token is out of vocabulary)")]
    NoEvents,
    #[error("models have different vocabularies; comparison would be meaningless")]
    VocabMismatch,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model must have at least one order")]
    NoOrders,
    #[error("backoff weight stored for {0} words, but order {1} has no probability entry for it")]
    OrphanBackoff(usize, usize),
}

/// Model construction options beyond the smoothing method.
#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub method: Method,
    /// Use raw counts instead of continuation counts at lower
    /// Kneser-Ney orders (the literal equations; ordinary absolute
    /// discounting).
    pub kn_raw_lower: bool,
    /// Fraction of base-distribution mass redistributed uniformly when
    /// some vocabulary word would otherwise have probability zero.
    pub epsilon_floor: f64,
}

impl BuildOptions {
    pub fn new(method: Method) -> Self {
        BuildOptions {
            method,
            kn_raw_lower: false,
            epsilon_floor: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BackoffModel {
    order: usize,
    vocab: Vocabulary,
    // probs[k-1]: k-gram → log10 probability
    probs: Vec<HashMap<Box<[WordId]>, f64>>,
    // bows[k-1]: context → log10 backoff weight, for k < order
    bows: Vec<HashMap<Box<[WordId]>, f64>>,
}

/// Score of a single prediction event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    LogProb(f64),
    Oov,
}

/// Perplexity evaluation summary.
///
/// `words` is the number of scored events: surface tokens plus one end
/// marker per sentence, minus skipped OOV tokens. `entropy_bits` is
/// −logprob10·log₂10/words and `ppl` is exactly 2^entropy_bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerplexityReport {
    pub sentences: u64,
    pub words: u64,
    pub oov: u64,
    pub logprob10: f64,
    pub entropy_bits: f64,
    pub ppl: f64,
}

impl PerplexityReport {
    fn from_sums(sentences: u64, words: u64, oov: u64, logprob10: f64) -> Self {
        let entropy_bits = -logprob10 * std::f64::consts::LOG2_10 / words as f64;
        PerplexityReport {
            sentences,
            words,
            oov,
            logprob10,
            entropy_bits,
            ppl: entropy_bits.exp2(),
        }
    }
}

/// Per-order discount estimation for a Kneser-Ney build: the highest
/// order (and every order, with `raw_lower`) uses raw count-of-counts;
/// lower orders use the count-of-counts of their continuation counts.
pub fn kn_discounts(
    counts: &NGramCountTable,
    raw_lower: bool,
) -> Result<Vec<(usize, Discounts)>, SmoothError> {
    let n = counts.order();
    let mut out = Vec::new();
    for k in 2..=n {
        let h = if k == n || raw_lower {
            counts.count_of_counts(k)
        } else {
            histogram(counts.continuation_counts(k).values().copied())
        };
        out.push((k, estimate_discounts(h, k)?));
    }
    Ok(out)
}

/// Build a backoff model of the table's order with default options.
pub fn build_backoff_model(
    counts: &NGramCountTable,
    vocab: &Vocabulary,
    method: Method,
) -> Result<BackoffModel, BuildError> {
    build_with_options(counts, vocab, &BuildOptions::new(method))
}

/// Any failure on the corpus-to-model path.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Vocab(#[from] crate::vocab::VocabError),
    #[error(transparent)]
    Count(#[from] crate::counts::CountError),
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Convenience path from a tokenized corpus straight to a model:
/// builds the vocabulary, counts n-grams, and assembles in one call.
pub fn train_model(
    corpus: &[Sentence],
    order: usize,
    options: &BuildOptions,
) -> Result<BackoffModel, TrainError> {
    let vocab = Vocabulary::from_corpus(corpus)?;
    let counts = crate::counts::count_ngrams(corpus, &vocab, order)?;
    Ok(build_with_options(&counts, &vocab, options)?)
}

pub fn build_with_options(
    counts: &NGramCountTable,
    vocab: &Vocabulary,
    options: &BuildOptions,
) -> Result<BackoffModel, BuildError> {
    let n = counts.order();
    if counts.num_types(1) == 0 {
        return Err(BuildError::EmptyCorpus);
    }

    let mut smoothed: Vec<SmoothedOrder> = Vec::with_capacity(n);
    smoothed.push(lowest_order_distribution(counts, options.method));
    match options.method {
        Method::WittenBell => {
            for k in 2..=n {
                smoothed.push(wb_smooth(counts, k));
            }
        }
        Method::KneserNey => {
            let discounts = kn_discounts(counts, options.kn_raw_lower)?;
            for (k, d) in &discounts {
                smoothed.push(mkn_smooth(counts, d, *k, *k == n || options.kn_raw_lower));
            }
        }
    }

    Ok(assemble(n, vocab.clone(), &smoothed, options.epsilon_floor))
}

// Linear-domain tables used only while assembling, for full precision in
// the backoff-weight sums.
struct Assembly {
    probs: Vec<HashMap<Box<[WordId]>, f64>>,
    bows: Vec<HashMap<Box<[WordId]>, f64>>,
}

impl Assembly {
    fn lookup(&self, context: &[WordId], word: WordId) -> f64 {
        let mut bow_acc = 1.0;
        for m in (0..=context.len()).rev() {
            let ctx = &context[context.len() - m..];
            let mut gram = ctx.to_vec();
            gram.push(word);
            if let Some(&p) = self.probs[m].get(gram.as_slice()) {
                return bow_acc * p;
            }
            if let Some(&a) = self.bows.get(m.wrapping_sub(1)).and_then(|t| t.get(ctx)) {
                bow_acc *= a;
            }
        }
        0.0
    }
}

fn assemble(
    n: usize,
    vocab: Vocabulary,
    smoothed: &[SmoothedOrder],
    epsilon_floor: f64,
) -> BackoffModel {
    let mut asm = Assembly {
        probs: vec![HashMap::new(); n],
        bows: vec![HashMap::new(); n.saturating_sub(1)],
    };

    // Base distribution over the full event vocabulary: fold the
    // reserved base mass in uniformly, then floor any zero entries.
    let base = smoothed[0]
        .row(&[])
        .expect("non-empty corpus has a base row");
    let events: Vec<WordId> = vocab.event_ids().collect();
    let mut base_probs: HashMap<WordId, f64> = events.iter().map(|&w| (w, 0.0)).collect();
    for &(w, tau) in &base.taus {
        base_probs.insert(w, tau);
    }
    let spread = base.gamma_mass / base_probs.len() as f64;
    for p in base_probs.values_mut() {
        *p += spread;
    }
    if base_probs.values().any(|&p| p == 0.0) {
        let m = base_probs.len() as f64;
        for p in base_probs.values_mut() {
            *p = *p * (1.0 - epsilon_floor) + epsilon_floor / m;
        }
    }
    for (w, p) in base_probs {
        asm.probs[0].insert(Box::from([w]), p);
    }
    // begin marker: context-only, probability-zero sentinel
    asm.probs[0].insert(Box::from([WordId::BOS]), 0.0);

    for k in 2..=n {
        let mut carriers: Vec<Box<[WordId]>> = Vec::new();
        for (context, row) in smoothed[k - 1].contexts() {
            let stored: Vec<(WordId, f64)> =
                row.taus.iter().copied().filter(|&(_, t)| t > 0.0).collect();
            if stored.is_empty() {
                continue;
            }
            let suffix = &context[1..];
            let covered: f64 = stored.iter().map(|&(w, _)| asm.lookup(suffix, w)).sum();
            let denom = 1.0 - covered;
            if denom.abs() < DEGENERATE_DENOM {
                // no unseen mass left to scale: renormalize the stored
                // probabilities over themselves
                log::warn!(
                    "order {k}: stored followers exhaust lower-order mass for a context; rescaling"
                );
                let scale = 1.0 / (1.0 - row.gamma_mass);
                for (w, tau) in stored {
                    let mut gram = context.to_vec();
                    gram.push(w);
                    asm.probs[k - 1].insert(gram.into(), tau * scale);
                }
            } else {
                let alpha = if row.gamma_mass > 0.0 {
                    row.gamma_mass / denom
                } else {
                    log::warn!(
                        "order {k}: context with zero reserved mass; flooring backoff weight"
                    );
                    ALPHA_FLOOR
                };
                for (w, tau) in stored {
                    let mut gram = context.to_vec();
                    gram.push(w);
                    asm.probs[k - 1].insert(gram.into(), tau);
                }
                asm.bows[k - 2].insert(context.into(), alpha);
            }
            carriers.push(context.into());
        }
        // every context of a stored gram must itself be a stored entry
        // (the file format attaches backoff weights to entries); re-add
        // removed ones with their backoff-computed value, which changes
        // no lookup
        for context in carriers {
            if !asm.probs[k - 2].contains_key(&context) {
                let (last, init) = context.split_last().expect("contexts are non-empty");
                let p = asm.lookup(init, *last);
                asm.probs[k - 2].insert(context, p);
            }
        }
    }

    let probs = asm
        .probs
        .iter()
        .enumerate()
        .map(|(i, table)| {
            table
                .iter()
                .map(|(g, &p)| {
                    let lp = if i == 0 && g[0] == WordId::BOS {
                        LOG10_ZERO
                    } else {
                        p.log10()
                    };
                    (g.clone(), lp)
                })
                .collect()
        })
        .collect();
    let bows = asm
        .bows
        .iter()
        .map(|table| table.iter().map(|(g, &a)| (g.clone(), a.log10())).collect())
        .collect();
    BackoffModel {
        order: n,
        vocab,
        probs,
        bows,
    }
}

impl BackoffModel {
    /// Assemble a model from explicit log₁₀ tables (deserialization and
    /// synthetic models). `bows` may be shorter than `probs` by one.
    pub fn from_parts(
        vocab: Vocabulary,
        probs: Vec<HashMap<Box<[WordId]>, f64>>,
        mut bows: Vec<HashMap<Box<[WordId]>, f64>>,
    ) -> Result<BackoffModel, ModelError> {
        if probs.is_empty() {
            return Err(ModelError::NoOrders);
        }
        let order = probs.len();
        bows.resize(order - 1, HashMap::new());
        for (i, table) in bows.iter().enumerate() {
            let orphans = table.keys().filter(|g| !probs[i].contains_key(*g)).count();
            if orphans > 0 {
                return Err(ModelError::OrphanBackoff(orphans, i + 1));
            }
        }
        Ok(BackoffModel {
            order,
            vocab,
            probs,
            bows,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn num_entries(&self, k: usize) -> usize {
        self.probs[k - 1].len()
    }

    /// Stored log₁₀ probability of a gram, if present.
    pub fn prob_entry(&self, gram: &[WordId]) -> Option<f64> {
        self.probs
            .get(gram.len().wrapping_sub(1))?
            .get(gram)
            .copied()
    }

    /// Stored log₁₀ backoff weight of a context, if present.
    pub fn bow_entry(&self, context: &[WordId]) -> Option<f64> {
        self.bows
            .get(context.len().wrapping_sub(1))?
            .get(context)
            .copied()
    }

    pub fn entries(&self, k: usize) -> impl Iterator<Item = (&[WordId], f64)> {
        self.probs[k - 1].iter().map(|(g, &p)| (g.as_ref(), p))
    }

    /// Backoff lookup in the log domain. `None` when the word has no
    /// unigram entry (out of vocabulary for this model).
    fn log_prob_known(&self, context: &[WordId], word: WordId) -> Option<f64> {
        let max_ctx = self.order - 1;
        let start = context.len().saturating_sub(max_ctx);
        let context = &context[start..];
        let mut bow_acc = 0.0;
        for m in (0..=context.len()).rev() {
            let ctx = &context[context.len() - m..];
            let mut gram = ctx.to_vec();
            gram.push(word);
            if let Some(&lp) = self.probs[m].get(gram.as_slice()) {
                return Some(bow_acc + lp);
            }
            if m == 0 {
                return None;
            }
            if let Some(&b) = self.bows[m - 1].get(ctx) {
                bow_acc += b;
            }
        }
        None
    }

    /// Score one prediction event. Out-of-vocabulary words yield
    /// [`Score::Oov`], never a probability.
    pub fn score(&self, context: &[WordId], word: WordId) -> Score {
        if word == WordId::UNK {
            return Score::Oov;
        }
        match self.log_prob_known(context, word) {
            Some(lp) => Score::LogProb(lp),
            None => Score::Oov,
        }
    }

    /// Linear-domain backoff probability, for direct inspection.
    pub fn prob(&self, context: &[WordId], word: WordId) -> Score {
        match self.score(context, word) {
            Score::LogProb(lp) => Score::LogProb(10f64.powf(lp)),
            Score::Oov => Score::Oov,
        }
    }

    /// Log₁₀ probability of a tokenized sentence: the sum over its
    /// L + 1 prediction events (each surface token plus the end marker,
    /// each conditioned on the begin marker and preceding tokens).
    /// OOV target words are skipped and tallied; they stay visible as
    /// context, where they force the fall-through to shorter histories.
    pub fn sentence_logprob(&self, sentence: &[String]) -> (f64, u64, u64) {
        let ids: Vec<WordId> = sentence.iter().map(|t| self.vocab.id_or_unk(t)).collect();
        let mut padded = Vec::with_capacity(ids.len() + 2);
        padded.push(WordId::BOS);
        padded.extend_from_slice(&ids);
        padded.push(WordId::EOS);

        let mut logprob = 0.0;
        let mut events = 0u64;
        let mut oov = 0u64;
        for i in 1..padded.len() {
            match self.score(&padded[..i], padded[i]) {
                Score::LogProb(lp) => {
                    logprob += lp;
                    events += 1;
                }
                Score::Oov => oov += 1,
            }
        }
        (logprob, events, oov)
    }

    /// Evaluate perplexity over a test corpus.
    pub fn perplexity(&self, test: &[Sentence]) -> Result<PerplexityReport, EvalError> {
        let mut logprob10 = 0.0;
        let mut words = 0u64;
        let mut oov = 0u64;
        for sentence in test {
            let (lp, ev, ov) = self.sentence_logprob(sentence);
            logprob10 += lp;
            words += ev;
            oov += ov;
        }
        if words == 0 {
            return Err(EvalError::NoEvents);
        }
        Ok(PerplexityReport::from_sums(
            test.len() as u64,
            words,
            oov,
            logprob10,
        ))
    }
}

/// Evaluate two models on one test set and report perplexities plus
/// their difference (first minus second). The models must share a
/// vocabulary so both skip the identical OOV events.
pub fn compare_models(
    a: &BackoffModel,
    b: &BackoffModel,
    test: &[Sentence],
) -> Result<(PerplexityReport, PerplexityReport, f64), EvalError> {
    if a.vocab != b.vocab {
        return Err(EvalError::VocabMismatch);
    }
    let ra = a.perplexity(test)?;
    let rb = b.perplexity(test)?;
    Ok((ra, rb, ra.ppl - rb.ppl))
}
