//! Smoothed per-order distributions.
//!
//! Each smoother turns counts into, per context `u`, a discounted
//! probability τ(w|u) for every seen follower and a reserved mass
//! γ_mass(u) — the probability withheld for unseen followers. By
//! construction Σ_w τ(w|u) + γ_mass(u) = 1 for every context.
//!
//! Witten-Bell reserves mass proportional to the number of distinct
//! followers and uses raw counts at every order. Modified Kneser-Ney
//! subtracts one of three count-dependent discounts, estimated in closed
//! form from the count-of-counts histogram, and replaces raw counts with
//! left-continuation counts at the lower orders (grams that can start a
//! sentence keep raw counts, since nothing precedes a sentence start).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::counts::{follower_stats_of, CountHistogram, NGramCountTable};
use crate::vocab::WordId;

/// Smoothing method selector. Parses from the CLI spellings `kn`/`wb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    KneserNey,
    WittenBell,
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kn" => Ok(Method::KneserNey),
            "wb" => Ok(Method::WittenBell),
            other => Err(format!(
                "unknown smoothing method {other:?} (expected kn or wb)"
            )),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::KneserNey => "kn",
            Method::WittenBell => "wb",
        })
    }
}

#[derive(Debug, Error)]
pub enum SmoothError {
    #[error(
        "cannot estimate discounts for order {order}: need n1 > 0 and n2 > 0, got n1={n1}, n2={n2} (corpus too small or too uniform)"
    )]
    DegenerateHistogram { order: usize, n1: u64, n2: u64 },
    #[error("no counts for context at order {0}")]
    UnseenContext(usize),
}

/// The three Modified Kneser-Ney discounts for one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discounts {
    pub d1: f64,
    pub d2: f64,
    pub d3_plus: f64,
}

impl Discounts {
    /// Count-dependent discount selector; D(0) = 0.
    pub fn discount(&self, c: u64) -> f64 {
        match c {
            0 => 0.0,
            1 => self.d1,
            2 => self.d2,
            _ => self.d3_plus,
        }
    }
}

/// Discounts for every order 2..=n of a model.
#[derive(Debug, Clone)]
pub struct DiscountSet {
    per_order: Vec<(usize, Discounts)>,
}

impl DiscountSet {
    pub fn new(per_order: Vec<(usize, Discounts)>) -> Self {
        DiscountSet { per_order }
    }

    pub fn get(&self, order: usize) -> Option<&Discounts> {
        self.per_order
            .iter()
            .find(|(k, _)| *k == order)
            .map(|(_, d)| d)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Discounts)> {
        self.per_order.iter().map(|(k, d)| (*k, d))
    }
}

/// Closed-form discount estimation from a count-of-counts histogram.
///
/// Y = n₁/(n₁+2n₂); D₁ = 1 − 2Y·n₂/n₁; D₂ = 2 − 3Y·n₃/n₂;
/// D₃₊ = 3 − 4Y·n₄/n₃, with the n₄/n₃ term treated as 0 when n₃ = 0.
/// Results are clamped to [0, j]. A fully-discounting D (count class
/// erased entirely) is legal but logged, since it usually signals a
/// corpus too small for the estimator to be meaningful.
pub fn estimate_discounts(h: CountHistogram, order: usize) -> Result<Discounts, SmoothError> {
    if h.n1 == 0 || h.n2 == 0 {
        return Err(SmoothError::DegenerateHistogram {
            order,
            n1: h.n1,
            n2: h.n2,
        });
    }
    let (n1, n2, n3, n4) = (h.n1 as f64, h.n2 as f64, h.n3 as f64, h.n4 as f64);
    let y = n1 / (n1 + 2.0 * n2);
    let d1 = (1.0 - 2.0 * y * n2 / n1).clamp(0.0, 1.0);
    let d2 = (2.0 - 3.0 * y * n3 / n2).clamp(0.0, 2.0);
    let d3_plus = if h.n3 == 0 {
        log::warn!("order {order}: no grams with count 3; third discount defaults to 3");
        3.0
    } else {
        (3.0 - 4.0 * y * n4 / n3).clamp(0.0, 3.0)
    };
    if d2 >= 2.0 {
        log::warn!("order {order}: count-2 grams fully discounted (D2 = {d2})");
    }
    if d3_plus >= 3.0 && h.n3 > 0 {
        log::warn!("order {order}: count-3 grams fully discounted (D3+ = {d3_plus})");
    }
    Ok(Discounts { d1, d2, d3_plus })
}

/// Followers of one context, sorted by word id, plus the reserved mass.
#[derive(Debug, Clone)]
pub struct ContextRow {
    pub taus: Vec<(WordId, f64)>,
    pub gamma_mass: f64,
}

/// One order's smoothed distribution: τ per (context, word) and γ_mass
/// per context. The order-1 distribution uses the empty context.
#[derive(Debug, Clone)]
pub struct SmoothedOrder {
    order: usize,
    contexts: HashMap<Box<[WordId]>, ContextRow>,
}

impl SmoothedOrder {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn tau(&self, context: &[WordId], word: WordId) -> Option<f64> {
        let row = self.contexts.get(context)?;
        row.taus
            .binary_search_by_key(&word, |&(w, _)| w)
            .ok()
            .map(|i| row.taus[i].1)
    }

    pub fn gamma_mass(&self, context: &[WordId]) -> Option<f64> {
        self.contexts.get(context).map(|row| row.gamma_mass)
    }

    pub fn row(&self, context: &[WordId]) -> Option<&ContextRow> {
        self.contexts.get(context)
    }

    pub fn contexts(&self) -> impl Iterator<Item = (&[WordId], &ContextRow)> {
        self.contexts.iter().map(|(c, row)| (c.as_ref(), row))
    }

    pub fn num_contexts(&self) -> usize {
        self.contexts.len()
    }
}

/// Group a flat gram→count map by context (all but the last id), with
/// follower lists sorted by word id for deterministic iteration.
fn group_by_context(
    grams: impl Iterator<Item = (Box<[WordId]>, u64)>,
) -> HashMap<Box<[WordId]>, Vec<(WordId, u64)>> {
    let mut groups: HashMap<Box<[WordId]>, Vec<(WordId, u64)>> = HashMap::new();
    for (gram, c) in grams {
        let (last, context) = gram.split_last().expect("grams are non-empty");
        groups.entry(context.into()).or_default().push((*last, c));
    }
    for followers in groups.values_mut() {
        followers.sort_unstable_by_key(|&(w, _)| w);
    }
    groups
}

fn order_k_grams(table: &NGramCountTable, k: usize) -> Vec<(Box<[WordId]>, u64)> {
    table
        .grams(k)
        .filter(|(g, _)| !(k == 1 && g[0] == WordId::BOS))
        .map(|(g, c)| (g.into(), c))
        .collect()
}

/// Witten-Bell smoothing for order k over raw counts:
/// τ(w|u) = c(u·w) / (N₁₊(u·) + Σc), γ_mass(u) = N₁₊(u·) / (N₁₊(u·) + Σc).
/// At k = 1 the begin marker is excluded — it is never a predicted event.
pub fn wb_smooth(table: &NGramCountTable, k: usize) -> SmoothedOrder {
    let groups = group_by_context(order_k_grams(table, k).into_iter());
    let mut contexts = HashMap::with_capacity(groups.len());
    for (context, followers) in groups {
        let total: u64 = followers.iter().map(|&(_, c)| c).sum();
        let distinct = followers.len() as u64;
        let denom = (distinct + total) as f64;
        let taus = followers
            .into_iter()
            .map(|(w, c)| (w, c as f64 / denom))
            .collect();
        contexts.insert(
            context,
            ContextRow {
                taus,
                gamma_mass: distinct as f64 / denom,
            },
        );
    }
    SmoothedOrder { order: k, contexts }
}

/// Modified Kneser-Ney smoothing for order k ≥ 2.
///
/// With `highest` set, raw counts are used; otherwise counts are
/// replaced by left-continuation counts (standard Kneser-Ney lower
/// orders). τ(w|u) = (ĉ − D(ĉ)) / Σĉ and
/// γ_mass(u) = (D₁·N₁(u·) + D₂·N₂(u·) + D₃₊·N₃₊(u·)) / Σĉ, with the
/// follower classes N_j taken over the same ĉ counts, which makes
/// Σ τ + γ_mass = 1 an algebraic identity.
pub fn mkn_smooth(
    table: &NGramCountTable,
    discounts: &Discounts,
    k: usize,
    highest: bool,
) -> SmoothedOrder {
    assert!(k >= 2, "orders below 2 use the base distribution");
    let grams: Vec<(Box<[WordId]>, u64)> = if highest {
        order_k_grams(table, k)
    } else {
        table.continuation_counts(k).into_iter().collect()
    };
    let groups = group_by_context(grams.into_iter());
    let mut contexts = HashMap::with_capacity(groups.len());
    for (context, followers) in groups {
        let total: u64 = followers.iter().map(|&(_, c)| c).sum();
        if total == 0 {
            continue;
        }
        let denom = total as f64;
        let stats = follower_stats_of(followers.iter().map(|&(_, c)| c));
        let gamma_mass = (discounts.d1 * stats.n1 as f64
            + discounts.d2 * stats.n2 as f64
            + discounts.d3_plus * stats.n3_plus as f64)
            / denom;
        let taus = followers
            .into_iter()
            .map(|(w, c)| (w, (c as f64 - discounts.discount(c)) / denom))
            .collect();
        contexts.insert(context, ContextRow { taus, gamma_mass });
    }
    SmoothedOrder { order: k, contexts }
}

/// The unigram base distribution (order-1 recursion base).
///
/// Witten-Bell: τ(w) = c(w)/(N₁₊(·) + Σc) with γ_mass = N₁₊(·)/(N₁₊(·) + Σc).
/// Modified Kneser-Ney: the left-continuation distribution
/// N₁₊(·w)/N₁₊(··) with γ_mass = 0; for an order-1 model, where no
/// bigram statistics exist, maximum likelihood over raw counts.
/// The begin marker never appears here — it receives probability 0.
pub fn lowest_order_distribution(table: &NGramCountTable, method: Method) -> SmoothedOrder {
    match method {
        Method::WittenBell => wb_smooth(table, 1),
        Method::KneserNey if table.order() >= 2 => {
            let mut continuation: Vec<(WordId, u64)> = {
                let mut per_word: HashMap<WordId, u64> = HashMap::new();
                for (gram, _) in table.grams(2) {
                    *per_word.entry(gram[1]).or_insert(0) += 1;
                }
                per_word.into_iter().collect()
            };
            continuation.sort_unstable_by_key(|&(w, _)| w);
            let total: u64 = continuation.iter().map(|&(_, c)| c).sum();
            let denom = total as f64;
            let taus = continuation
                .into_iter()
                .map(|(w, c)| (w, c as f64 / denom))
                .collect();
            let mut contexts = HashMap::new();
            let empty: Box<[WordId]> = Box::new([]);
            contexts.insert(
                empty,
                ContextRow {
                    taus,
                    gamma_mass: 0.0,
                },
            );
            SmoothedOrder { order: 1, contexts }
        }
        Method::KneserNey => {
            let mut unigrams = order_k_grams(table, 1);
            unigrams.sort_unstable_by_key(|(g, _)| g[0]);
            let total: u64 = unigrams.iter().map(|&(_, c)| c).sum();
            let denom = total as f64;
            let taus = unigrams
                .into_iter()
                .map(|(g, c)| (g[0], c as f64 / denom))
                .collect();
            let mut contexts = HashMap::new();
            let empty: Box<[WordId]> = Box::new([]);
            contexts.insert(
                empty,
                ContextRow {
                    taus,
                    gamma_mass: 0.0,
                },
            );
            SmoothedOrder { order: 1, contexts }
        }
    }
}

/// Maximum likelihood estimate c(context·word) / Σ_w c(context·w).
pub fn mle_prob(
    table: &NGramCountTable,
    context: &[WordId],
    word: WordId,
) -> Result<f64, SmoothError> {
    let total = table.context_total(context);
    if total == 0 {
        return Err(SmoothError::UnseenContext(context.len() + 1));
    }
    let mut gram = context.to_vec();
    gram.push(word);
    Ok(table.count(&gram) as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counts::count_ngrams;
    use crate::prep::Sentence;
    use crate::vocab::Vocabulary;
    use approx::assert_relative_eq;

    fn sent(s: &str) -> Sentence {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn t1() -> (NGramCountTable, Vocabulary) {
        let corpus = vec![sent("a b"), sent("a c"), sent("a b")];
        let vocab = Vocabulary::from_corpus(&corpus).unwrap();
        let table = count_ngrams(&corpus, &vocab, 2).unwrap();
        (table, vocab)
    }

    fn wid(vocab: &Vocabulary, t: &str) -> WordId {
        vocab.id(t).unwrap()
    }

    #[test]
    fn method_parses_cli_spellings() {
        assert_eq!("kn".parse::<Method>().unwrap(), Method::KneserNey);
        assert_eq!("wb".parse::<Method>().unwrap(), Method::WittenBell);
        assert!("katz".parse::<Method>().is_err());
        assert_eq!(Method::KneserNey.to_string(), "kn");
    }

    #[test]
    fn discount_estimation_worked_example() {
        let h = CountHistogram {
            n1: 2,
            n2: 2,
            n3: 1,
            n4: 0,
        };
        let d = estimate_discounts(h, 2).unwrap();
        assert_relative_eq!(d.d1, 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(d.d2, 1.5, epsilon = 1e-12);
        assert_relative_eq!(d.d3_plus, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn discount_estimation_rejects_degenerate_histograms() {
        let err = estimate_discounts(
            CountHistogram {
                n1: 0,
                n2: 5,
                n3: 1,
                n4: 1,
            },
            3,
        );
        assert!(matches!(
            err,
            Err(SmoothError::DegenerateHistogram { order: 3, .. })
        ));
        let err = estimate_discounts(
            CountHistogram {
                n1: 5,
                n2: 0,
                n3: 1,
                n4: 1,
            },
            4,
        );
        assert!(matches!(
            err,
            Err(SmoothError::DegenerateHistogram { order: 4, .. })
        ));
    }

    #[test]
    fn missing_n3_defaults_third_discount() {
        let d = estimate_discounts(
            CountHistogram {
                n1: 3,
                n2: 2,
                n3: 0,
                n4: 0,
            },
            2,
        )
        .unwrap();
        assert_eq!(d.d3_plus, 3.0);
    }

    #[test]
    fn discount_selector_is_exhaustive() {
        let d = Discounts {
            d1: 0.4,
            d2: 1.1,
            d3_plus: 2.2,
        };
        assert_eq!(d.discount(0), 0.0);
        assert_eq!(d.discount(1), 0.4);
        assert_eq!(d.discount(2), 1.1);
        assert_eq!(d.discount(3), 2.2);
        assert_eq!(d.discount(17), 2.2);
    }

    #[test]
    fn wb_worked_example() {
        let (table, v) = t1();
        let smoothed = wb_smooth(&table, 2);
        let a = [wid(&v, "a")];
        assert_relative_eq!(
            smoothed.tau(&a, wid(&v, "b")).unwrap(),
            0.4,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            smoothed.tau(&a, wid(&v, "c")).unwrap(),
            0.2,
            epsilon = 1e-12
        );
        assert_relative_eq!(smoothed.gamma_mass(&a).unwrap(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn mkn_worked_example() {
        let (table, v) = t1();
        let d = estimate_discounts(table.count_of_counts(2), 2).unwrap();
        let smoothed = mkn_smooth(&table, &d, 2, true);
        let a = [wid(&v, "a")];
        assert_relative_eq!(
            smoothed.tau(&a, wid(&v, "b")).unwrap(),
            1.0 / 6.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            smoothed.tau(&a, wid(&v, "c")).unwrap(),
            2.0 / 9.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            smoothed.gamma_mass(&a).unwrap(),
            11.0 / 18.0,
            epsilon = 1e-12
        );
        // begin-of-sentence context: count-3 follower fully discounted
        let bos = [WordId::BOS];
        assert_relative_eq!(
            smoothed.tau(&bos, wid(&v, "a")).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(smoothed.gamma_mass(&bos).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn every_context_normalizes() {
        let corpus = vec![sent("a b c"), sent("a b d"), sent("b c a"), sent("a b c")];
        let vocab = Vocabulary::from_corpus(&corpus).unwrap();
        let table = count_ngrams(&corpus, &vocab, 3).unwrap();
        let d = Discounts {
            d1: 0.5,
            d2: 1.2,
            d3_plus: 1.7,
        };
        for smoothed in [
            wb_smooth(&table, 1),
            wb_smooth(&table, 2),
            wb_smooth(&table, 3),
            mkn_smooth(&table, &d, 2, false),
            mkn_smooth(&table, &d, 3, true),
            lowest_order_distribution(&table, Method::KneserNey),
        ] {
            for (_, row) in smoothed.contexts() {
                let sum: f64 = row.taus.iter().map(|&(_, t)| t).sum::<f64>() + row.gamma_mass;
                assert_relative_eq!(sum, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn mkn_base_is_continuation_distribution() {
        let (table, v) = t1();
        let base = lowest_order_distribution(&table, Method::KneserNey);
        assert_relative_eq!(base.tau(&[], wid(&v, "a")).unwrap(), 0.2, epsilon = 1e-12);
        assert_relative_eq!(base.tau(&[], WordId::EOS).unwrap(), 0.4, epsilon = 1e-12);
        assert_eq!(base.gamma_mass(&[]).unwrap(), 0.0);
        assert!(base.tau(&[], WordId::BOS).is_none());
    }

    #[test]
    fn wb_base_worked_example() {
        let (table, v) = t1();
        let base = lowest_order_distribution(&table, Method::WittenBell);
        assert_relative_eq!(
            base.tau(&[], wid(&v, "a")).unwrap(),
            3.0 / 13.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(base.gamma_mass(&[]).unwrap(), 4.0 / 13.0, epsilon = 1e-12);
        assert!(base.tau(&[], WordId::BOS).is_none());
    }

    #[test]
    fn order_one_mkn_base_is_mle() {
        let corpus = vec![sent("a b"), sent("a c"), sent("a b")];
        let vocab = Vocabulary::from_corpus(&corpus).unwrap();
        let table = count_ngrams(&corpus, &vocab, 1).unwrap();
        let base = lowest_order_distribution(&table, Method::KneserNey);
        assert_relative_eq!(
            base.tau(&[], wid(&vocab, "a")).unwrap(),
            3.0 / 9.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            base.tau(&[], WordId::EOS).unwrap(),
            3.0 / 9.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn single_sentence_base_normalizes() {
        let corpus = vec![sent("a a")];
        let vocab = Vocabulary::from_corpus(&corpus).unwrap();
        let table = count_ngrams(&corpus, &vocab, 1).unwrap();
        for method in [Method::KneserNey, Method::WittenBell] {
            let base = lowest_order_distribution(&table, method);
            let row = base.row(&[]).unwrap();
            let sum: f64 = row.taus.iter().map(|&(_, t)| t).sum::<f64>() + row.gamma_mass;
            assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn mkn_lower_order_uses_continuation_counts() {
        let corpus = vec![sent("a b c"), sent("d b c")];
        let vocab = Vocabulary::from_corpus(&corpus).unwrap();
        let table = count_ngrams(&corpus, &vocab, 3).unwrap();
        let d = Discounts {
            d1: 0.5,
            d2: 1.0,
            d3_plus: 1.5,
        };
        let smoothed = mkn_smooth(&table, &d, 2, false);
        let b = [wid(&vocab, "b")];
        // continuation count of "b c" is 2 ("a b c" and "d b c"), raw would be 2 as well,
        // but continuation of "c </s>" is 1 while raw is 2
        assert_relative_eq!(
            smoothed.tau(&b, wid(&vocab, "c")).unwrap(),
            (2.0 - 1.0) / 2.0,
            epsilon = 1e-12
        );
        let c = [wid(&vocab, "c")];
        assert_relative_eq!(
            smoothed.tau(&c, WordId::EOS).unwrap(),
            (1.0 - 0.5) / 1.0,
            epsilon = 1e-12
        );
        // begin-of-sentence contexts keep raw counts
        let bos = [WordId::BOS];
        assert_relative_eq!(
            smoothed.tau(&bos, wid(&vocab, "a")).unwrap(),
            (1.0 - 0.5) / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn mle_prob_examples() {
        let (table, v) = t1();
        let a = [wid(&v, "a")];
        assert_relative_eq!(mle_prob(&table, &a, wid(&v, "b")).unwrap(), 2.0 / 3.0);
        assert_relative_eq!(mle_prob(&table, &a, wid(&v, "c")).unwrap(), 1.0 / 3.0);
        assert_eq!(mle_prob(&table, &a, WordId(999)).unwrap(), 0.0);
        assert!(mle_prob(&table, &[WordId(999)], wid(&v, "b")).is_err());
    }
}
