//! Shared helpers for the integration suites.
//!
//! The `naive` module is a from-scratch reference implementation of
//! counting, discount estimation, smoothing, and backoff assembly. It
//! works on plain string tokens with flat maps and direct formula
//! transcriptions — no sharing of code paths with the library beyond
//! the public types under test — so agreement between the two is
//! meaningful evidence, not a tautology.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::rngs::StdRng;
use rand::Rng;

use ngram_lm::model::kn_discounts;
use ngram_lm::prep::Sentence;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

pub fn sent(s: &str) -> Sentence {
    s.split_whitespace().map(str::to_string).collect()
}

pub fn corpus(lines: &[&str]) -> Vec<Sentence> {
    lines.iter().map(|l| sent(l)).collect()
}

/// The worked tiny corpus used throughout the suites.
pub fn t1() -> Vec<Sentence> {
    corpus(&["a b", "a c", "a b"])
}

/// Relative-or-absolute closeness assertion with a labelled failure.
pub fn assert_rel(actual: f64, expected: f64, tol: f64, what: &str) {
    let scale = expected.abs().max(1.0);
    assert!(
        (actual - expected).abs() <= tol * scale,
        "{what}: got {actual}, want {expected} (tol {tol})"
    );
}

pub mod naive {
    //! Reference implementation: string-keyed, quadratic, literal.

    use super::*;

    pub type Gram = Vec<String>;

    fn pad(sentence: &[String]) -> Vec<String> {
        let mut padded = Vec::with_capacity(sentence.len() + 2);
        padded.push(BOS.to_string());
        padded.extend_from_slice(sentence);
        padded.push(EOS.to_string());
        padded
    }

    /// All k-gram window counts for k = 1..=order, in one flat map.
    pub fn counts(corpus: &[Sentence], order: usize) -> HashMap<Gram, u64> {
        let mut out: HashMap<Gram, u64> = HashMap::new();
        for sentence in corpus {
            let padded = pad(sentence);
            for k in 1..=order {
                for window in padded.windows(k) {
                    *out.entry(window.to_vec()).or_insert(0) += 1;
                }
            }
        }
        out
    }

    /// (n1, n2, n3, n4) of the order-k counts.
    pub fn histogram(counts: &HashMap<Gram, u64>, k: usize) -> (u64, u64, u64, u64) {
        let mut h = (0, 0, 0, 0);
        for (gram, &c) in counts {
            if gram.len() != k {
                continue;
            }
            match c {
                1 => h.0 += 1,
                2 => h.1 += 1,
                3 => h.2 += 1,
                4 => h.3 += 1,
                _ => {}
            }
        }
        h
    }

    /// Continuation counts for order k < order of `counts`: per k-gram,
    /// the number of distinct immediate predecessors, except grams that
    /// start a sentence, which keep their raw counts (nothing can
    /// precede the begin marker).
    pub fn continuation(counts: &HashMap<Gram, u64>, k: usize) -> HashMap<Gram, u64> {
        let mut preceders: HashMap<Gram, BTreeSet<String>> = HashMap::new();
        for gram in counts.keys() {
            if gram.len() == k + 1 {
                preceders
                    .entry(gram[1..].to_vec())
                    .or_default()
                    .insert(gram[0].clone());
            }
        }
        let mut out: HashMap<Gram, u64> = preceders
            .into_iter()
            .map(|(g, set)| (g, set.len() as u64))
            .collect();
        for (gram, &raw) in counts {
            if gram.len() == k && gram[0] == BOS {
                out.insert(gram.clone(), raw);
            }
        }
        out
    }

    /// Closed-form discounts from a count-of-counts histogram:
    /// Y = n1/(n1+2n2), D1 = 1−2Y·n2/n1, D2 = 2−3Y·n3/n2,
    /// D3+ = 3−4Y·n4/n3 (3 when n3 = 0), each clamped to [0, j].
    /// Returns None when n1 or n2 is zero (the estimator is undefined).
    pub fn discounts(h: (u64, u64, u64, u64)) -> Option<(f64, f64, f64)> {
        let (n1, n2, n3, n4) = h;
        if n1 == 0 || n2 == 0 {
            return None;
        }
        let (n1, n2, n3, n4) = (n1 as f64, n2 as f64, n3 as f64, n4 as f64);
        let y = n1 / (n1 + 2.0 * n2);
        let d1 = (1.0 - 2.0 * y * n2 / n1).clamp(0.0, 1.0);
        let d2 = (2.0 - 3.0 * y * n3 / n2).clamp(0.0, 2.0);
        let d3 = if n3 == 0.0 {
            3.0
        } else {
            (3.0 - 4.0 * y * n4 / n3).clamp(0.0, 3.0)
        };
        Some((d1, d2, d3))
    }

    /// One context's smoothed row: τ per follower plus the reserved mass.
    #[derive(Debug, Clone, Default)]
    pub struct Row {
        pub taus: BTreeMap<String, f64>,
        pub gamma: f64,
    }

    /// Per-context rows of one order.
    pub type Order = HashMap<Gram, Row>;

    fn group(grams: impl Iterator<Item = (Gram, u64)>) -> HashMap<Gram, BTreeMap<String, u64>> {
        let mut groups: HashMap<Gram, BTreeMap<String, u64>> = HashMap::new();
        for (mut gram, c) in grams {
            let word = gram.pop().expect("grams are non-empty");
            groups.entry(gram).or_default().insert(word, c);
        }
        groups
    }

    fn order_grams(counts: &HashMap<Gram, u64>, k: usize) -> Vec<(Gram, u64)> {
        counts
            .iter()
            .filter(|(g, _)| g.len() == k && !(k == 1 && g[0] == BOS))
            .map(|(g, &c)| (g.clone(), c))
            .collect()
    }

    /// Witten-Bell: τ(w|u) = c/(N₁₊(u·)+Σc), γ(u) = N₁₊(u·)/(N₁₊(u·)+Σc).
    pub fn wb(counts: &HashMap<Gram, u64>, k: usize) -> Order {
        let mut out = Order::new();
        for (context, followers) in group(order_grams(counts, k).into_iter()) {
            let total: u64 = followers.values().sum();
            let distinct = followers.len() as u64;
            let denom = (distinct + total) as f64;
            let taus = followers
                .into_iter()
                .map(|(w, c)| (w, c as f64 / denom))
                .collect();
            out.insert(
                context,
                Row {
                    taus,
                    gamma: distinct as f64 / denom,
                },
            );
        }
        out
    }

    /// Modified Kneser-Ney for order k ≥ 2: τ(w|u) = (ĉ−D(ĉ))/Σĉ,
    /// γ(u) = (D₁N₁ + D₂N₂ + D₃₊N₃₊)/Σĉ, over raw counts when `highest`
    /// and continuation counts otherwise.
    pub fn mkn(counts: &HashMap<Gram, u64>, k: usize, d: (f64, f64, f64), highest: bool) -> Order {
        let grams = if highest {
            order_grams(counts, k)
        } else {
            continuation(counts, k).into_iter().collect()
        };
        let pick = |c: u64| match c {
            0 => 0.0,
            1 => d.0,
            2 => d.1,
            _ => d.2,
        };
        let mut out = Order::new();
        for (context, followers) in group(grams.into_iter()) {
            let total: u64 = followers.values().sum();
            if total == 0 {
                continue;
            }
            let denom = total as f64;
            let (mut k1, mut k2, mut k3) = (0u64, 0u64, 0u64);
            for &c in followers.values() {
                match c {
                    0 => {}
                    1 => k1 += 1,
                    2 => k2 += 1,
                    _ => k3 += 1,
                }
            }
            let gamma = (d.0 * k1 as f64 + d.1 * k2 as f64 + d.2 * k3 as f64) / denom;
            let taus = followers
                .into_iter()
                .map(|(w, c)| (w, (c as f64 - pick(c)) / denom))
                .collect();
            out.insert(context, Row { taus, gamma });
        }
        out
    }

    /// The unigram recursion base. Witten-Bell smooths raw unigrams;
    /// Kneser-Ney uses the left-continuation distribution (maximum
    /// likelihood when the model has no bigram statistics to draw on).
    pub fn base(counts: &HashMap<Gram, u64>, order: usize, kneser_ney: bool) -> Row {
        if !kneser_ney {
            return wb(counts, 1).remove(&Vec::new()).expect("non-empty corpus");
        }
        let mut weights: BTreeMap<String, u64> = BTreeMap::new();
        if order >= 2 {
            for gram in counts.keys() {
                if gram.len() == 2 {
                    *weights.entry(gram[1].clone()).or_insert(0) += 1;
                }
            }
        } else {
            for (gram, &c) in counts {
                if gram.len() == 1 && gram[0] != BOS {
                    *weights.entry(gram[0].clone()).or_insert(0) += c;
                }
            }
        }
        let total: u64 = weights.values().sum();
        let denom = total as f64;
        Row {
            taus: weights
                .into_iter()
                .map(|(w, c)| (w, c as f64 / denom))
                .collect(),
            gamma: 0.0,
        }
    }

    /// A fully assembled reference model in the linear domain.
    ///
    /// Assembly policy, mirrored from the library's documented rules:
    /// the base distribution folds its reserved mass in uniformly over
    /// the event vocabulary and floors any exact zero; followers with
    /// τ = 0 are pruned (their mass is already reserved); a context
    /// whose stored followers exhaust the lower-order mass (leftover
    /// below 1e-12) rescales them by 1/(1−γ) and carries no backoff
    /// weight; a context with γ = 0 gets the 1e-10 backoff floor;
    /// otherwise α(u) = γ(u)/(1 − Σ_stored P(w|suffix u)); and every
    /// context of a stored gram is materialized as an entry of its own
    /// order with its backoff-computed value.
    pub struct Model {
        pub order: usize,
        pub events: Vec<String>,
        // probs[k-1]: linear probability per stored k-gram
        pub probs: Vec<HashMap<Gram, f64>>,
        // bows[k-1]: linear backoff weight per stored context
        pub bows: Vec<HashMap<Gram, f64>>,
        // alphas of contexts, kept separately for oracle comparisons
        pub rescaled: Vec<Gram>,
    }

    impl Model {
        /// Backoff lookup against the (possibly partial) tables.
        pub fn prob(&self, context: &[String], word: &str) -> f64 {
            let start = context.len().saturating_sub(self.order - 1);
            let context = &context[start..];
            for m in (0..=context.len()).rev() {
                let ctx = &context[context.len() - m..];
                let mut gram = ctx.to_vec();
                gram.push(word.to_string());
                if let Some(&p) = self.probs[m].get(&gram) {
                    let mut bow = 1.0;
                    for j in (m + 1..=context.len()).rev() {
                        let outer = &context[context.len() - j..];
                        if let Some(&a) = self.bows[j - 1].get(outer) {
                            bow *= a;
                        }
                    }
                    return bow * p;
                }
            }
            0.0
        }
    }

    /// Build the reference model. `events` is every surface word plus
    /// the end marker, in first-occurrence order.
    pub fn build(
        corpus: &[Sentence],
        order: usize,
        kneser_ney: bool,
        kn_raw_lower: bool,
        epsilon_floor: f64,
    ) -> Option<Model> {
        let all = counts(corpus, order);
        let mut events: Vec<String> = vec![EOS.to_string()];
        for sentence in corpus {
            for token in sentence {
                if !events.iter().any(|t| t == token) {
                    events.push(token.clone());
                }
            }
        }

        // per-order smoothed rows
        let mut smoothed: Vec<Order> = Vec::with_capacity(order);
        let base_row = base(&all, order, kneser_ney);
        let mut base_order = Order::new();
        base_order.insert(Vec::new(), base_row);
        smoothed.push(base_order);
        for k in 2..=order {
            if kneser_ney {
                let h = if k == order || kn_raw_lower {
                    histogram(&all, k)
                } else {
                    let cont = continuation(&all, k);
                    let mut h = (0, 0, 0, 0);
                    for &c in cont.values() {
                        match c {
                            1 => h.0 += 1,
                            2 => h.1 += 1,
                            3 => h.2 += 1,
                            4 => h.3 += 1,
                            _ => {}
                        }
                    }
                    h
                };
                let d = discounts(h)?;
                smoothed.push(mkn(&all, k, d, k == order || kn_raw_lower));
            } else {
                smoothed.push(wb(&all, k));
            }
        }

        let mut model = Model {
            order,
            events: events.clone(),
            probs: vec![HashMap::new(); order],
            bows: vec![HashMap::new(); order.saturating_sub(1)],
            rescaled: Vec::new(),
        };

        // base layer over the full event vocabulary
        let base_row = &smoothed[0][&Vec::new()];
        let mut base_probs: BTreeMap<String, f64> =
            events.iter().map(|w| (w.clone(), 0.0)).collect();
        for (w, &tau) in &base_row.taus {
            base_probs.insert(w.clone(), tau);
        }
        let spread = base_row.gamma / base_probs.len() as f64;
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
            model.probs[0].insert(vec![w], p);
        }
        model.probs[0].insert(vec![BOS.to_string()], 0.0);

        for k in 2..=order {
            let mut carriers: Vec<Gram> = Vec::new();
            // deterministic context order (values are order-independent)
            let mut contexts: Vec<&Gram> = smoothed[k - 1].keys().collect();
            contexts.sort();
            for context in contexts {
                let row = &smoothed[k - 1][context];
                let stored: Vec<(&String, f64)> = row
                    .taus
                    .iter()
                    .filter(|&(_, &t)| t > 0.0)
                    .map(|(w, &t)| (w, t))
                    .collect();
                if stored.is_empty() {
                    continue;
                }
                let suffix = &context[1..];
                let covered: f64 = stored.iter().map(|&(w, _)| model.prob(suffix, w)).sum();
                let denom = 1.0 - covered;
                if denom.abs() < 1e-12 {
                    let scale = 1.0 / (1.0 - row.gamma);
                    for (w, tau) in stored {
                        let mut gram = context.clone();
                        gram.push(w.clone());
                        model.probs[k - 1].insert(gram, tau * scale);
                    }
                    model.rescaled.push(context.clone());
                } else {
                    let alpha = if row.gamma > 0.0 {
                        row.gamma / denom
                    } else {
                        1e-10
                    };
                    for (w, tau) in stored {
                        let mut gram = context.clone();
                        gram.push(w.clone());
                        model.probs[k - 1].insert(gram, tau);
                    }
                    model.bows[k - 2].insert(context.clone(), alpha);
                }
                carriers.push(context.clone());
            }
            for context in carriers {
                if !model.probs[k - 2].contains_key(&context) {
                    let (last, init) = context.split_last().expect("contexts are non-empty");
                    let p = model.prob(init, last);
                    model.probs[k - 2].insert(context, p);
                }
            }
        }
        Some(model)
    }
}

/// A uniformly random corpus: `1..=max_sentences` sentences of
/// `1..=max_len` tokens drawn from `vocab`.
pub fn random_corpus(
    rng: &mut StdRng,
    max_sentences: usize,
    max_len: usize,
    vocab: &[&str],
) -> Vec<Sentence> {
    let n = rng.gen_range(1..=max_sentences);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            (0..len)
                .map(|_| vocab[rng.gen_range(0..vocab.len())].to_string())
                .collect()
        })
        .collect()
}

/// A small random corpus on which Kneser-Ney discount estimation is
/// guaranteed to succeed at every order 2..=order, for both raw and
/// continuation count histograms.
///
/// Construction: a few base sentences each emitted twice plus once with
/// a changed first word — the duplicates give every inner window a
/// count of two or three and the variant gives shared suffixes a second
/// distinct predecessor — then a handful of fully random sentences for
/// singletons. A rejection loop re-draws on the rare miss.
pub fn kn_trainable_corpus(rng: &mut StdRng, order: usize, vocab: &[&str]) -> Vec<Sentence> {
    use ngram_lm::counts::count_ngrams;
    use ngram_lm::vocab::Vocabulary;

    for _ in 0..200 {
        let mut corpus: Vec<Sentence> = Vec::new();
        for _ in 0..rng.gen_range(2..=4) {
            let len = rng.gen_range(order + 2..=order + 6);
            let base: Sentence = (0..len)
                .map(|_| vocab[rng.gen_range(0..vocab.len())].to_string())
                .collect();
            corpus.push(base.clone());
            corpus.push(base.clone());
            let mut variant = base.clone();
            let replacement = loop {
                let w = vocab[rng.gen_range(0..vocab.len())];
                if w != variant[0] {
                    break w;
                }
            };
            variant[0] = replacement.to_string();
            corpus.push(variant);
        }
        for _ in 0..rng.gen_range(3..=8) {
            let len = rng.gen_range(1..=8);
            corpus.push(
                (0..len)
                    .map(|_| vocab[rng.gen_range(0..vocab.len())].to_string())
                    .collect(),
            );
        }
        let vocabulary = Vocabulary::from_corpus(&corpus).expect("no reserved tokens");
        let counts = count_ngrams(&corpus, &vocabulary, order).expect("in-vocabulary");
        if kn_discounts(&counts, false).is_ok() && kn_discounts(&counts, true).is_ok() {
            return corpus;
        }
    }
    panic!("no trainable corpus found in 200 draws (order {order})");
}

/// Ten surface words; small enough that random corpora stress shared
/// contexts instead of pure sparsity.
pub const SMALL_VOCAB: &[&str] = &["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];

pub fn gram_strings(vocab: &ngram_lm::Vocabulary, gram: &[ngram_lm::WordId]) -> Vec<String> {
    gram.iter().map(|&id| vocab.word(id).to_string()).collect()
}

pub fn gram_ids(vocab: &ngram_lm::Vocabulary, gram: &[String]) -> Vec<ngram_lm::WordId> {
    gram.iter()
        .map(|t| vocab.id(t).expect("reference gram token in vocabulary"))
        .collect()
}

pub fn vocab_and_counts(
    corpus: &[Sentence],
    order: usize,
) -> (ngram_lm::Vocabulary, ngram_lm::NGramCountTable) {
    let vocab = ngram_lm::Vocabulary::from_corpus(corpus).expect("no reserved tokens");
    let counts = ngram_lm::count_ngrams(corpus, &vocab, order).expect("tokens in vocabulary");
    (vocab, counts)
}

/// Every produced (context, τ, γ) row must match the reference row and
/// vice versa, to 1e-12.
pub fn assert_order_matches(
    vocab: &ngram_lm::Vocabulary,
    produced: &ngram_lm::SmoothedOrder,
    reference: &naive::Order,
    what: &str,
) {
    assert_eq!(
        produced.num_contexts(),
        reference.len(),
        "{what}: context count"
    );
    for (context, row) in produced.contexts() {
        let key = gram_strings(vocab, context);
        let expect = reference
            .get(&key)
            .unwrap_or_else(|| panic!("{what}: context {key:?} missing from reference"));
        assert_rel(
            row.gamma_mass,
            expect.gamma,
            1e-12,
            &format!("{what}: γ({key:?})"),
        );
        assert_eq!(
            row.taus.len(),
            expect.taus.len(),
            "{what}: followers of {key:?}"
        );
        for &(w, tau) in &row.taus {
            let token = vocab.word(w);
            let r = expect
                .taus
                .get(token)
                .unwrap_or_else(|| panic!("{what}: follower {token} of {key:?} missing"));
            assert_rel(tau, *r, 1e-12, &format!("{what}: τ({token}|{key:?})"));
        }
    }
}

/// Stored tables (probabilities, backoff weights, entry sets) and the
/// full backoff scoring function must match the reference model to 1e-12.
pub fn assert_model_matches(model: &ngram_lm::BackoffModel, reference: &naive::Model, what: &str) {
    use ngram_lm::Score;

    let vocab = model.vocab();
    assert_eq!(model.order(), reference.order, "{what}: order");
    for k in 1..=model.order() {
        assert_eq!(
            model.num_entries(k),
            reference.probs[k - 1].len(),
            "{what}: entry count at order {k}"
        );
        let mut bows = 0usize;
        for (gram, lp) in model.entries(k) {
            let key = gram_strings(vocab, gram);
            let r = reference.probs[k - 1]
                .get(&key)
                .unwrap_or_else(|| panic!("{what}: entry {key:?} missing from reference"));
            if *r == 0.0 {
                assert_eq!(lp, -99.0, "{what}: zero-probability sentinel for {key:?}");
            } else {
                assert_rel(10f64.powf(lp), *r, 1e-12, &format!("{what}: P{key:?}"));
            }
            if model.bow_entry(gram).is_some() {
                bows += 1;
            }
        }
        if k < model.order() {
            assert_eq!(
                bows,
                reference.bows[k - 1].len(),
                "{what}: backoff count at order {k}"
            );
            for (context, alpha) in &reference.bows[k - 1] {
                let ids = gram_ids(vocab, context);
                let got = model
                    .bow_entry(&ids)
                    .unwrap_or_else(|| panic!("{what}: backoff for {context:?} missing"));
                assert_rel(
                    10f64.powf(got),
                    *alpha,
                    1e-12,
                    &format!("{what}: α({context:?})"),
                );
            }
        }
    }
    // full scoring equality over every stored context × every event
    let mut contexts: Vec<Vec<ngram_lm::WordId>> = vec![Vec::new()];
    for k in 1..model.order() {
        contexts.extend(model.entries(k).map(|(g, _)| g.to_vec()));
    }
    for context in &contexts {
        let key = gram_strings(vocab, context);
        for w in vocab.event_ids() {
            let got = match model.prob(context, w) {
                Score::LogProb(p) => p,
                Score::Oov => panic!("{what}: event scored as OOV"),
            };
            let want = reference.prob(&key, vocab.word(w));
            assert_rel(
                got,
                want,
                1e-12,
                &format!("{what}: P({}|{key:?})", vocab.word(w)),
            );
        }
    }
}

/// Brute-force normalization check: for every stored gram treated as a
/// context (every entry of order < n, plus the empty context), sum
/// P(w|u) over the entire event vocabulary and return the worst
/// |sum − 1| observed.
pub fn normalization_max_err(model: &ngram_lm::BackoffModel) -> f64 {
    use ngram_lm::Score;

    let events: Vec<ngram_lm::WordId> = model.vocab().event_ids().collect();
    let mut contexts: Vec<Vec<ngram_lm::WordId>> = vec![Vec::new()];
    for k in 1..model.order() {
        contexts.extend(model.entries(k).map(|(g, _)| g.to_vec()));
    }
    let mut worst = 0.0f64;
    for context in &contexts {
        let sum: f64 = events
            .iter()
            .map(|&w| match model.prob(context, w) {
                Score::LogProb(p) => p,
                Score::Oov => panic!("event word scored as out of vocabulary"),
            })
            .sum();
        worst = worst.max((sum - 1.0).abs());
    }
    worst
}

/// |PPL − 2^H| and |H − (−logprob·log₂10/W)| as relative errors; the
/// larger of the two.
pub fn ppl_identity_err(report: &ngram_lm::PerplexityReport) -> f64 {
    let h = -report.logprob10 * std::f64::consts::LOG2_10 / report.words as f64;
    let eh = ((report.entropy_bits - h) / h.abs().max(1.0)).abs();
    let ep = ((report.ppl - report.entropy_bits.exp2()) / report.ppl).abs();
    eh.max(ep)
}
