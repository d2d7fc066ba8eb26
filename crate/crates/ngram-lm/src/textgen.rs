//! Seeded synthetic corpus generation.
//!
//! Produces a homogeneous pseudo-natural corpus with the statistical
//! shape n-gram experiments care about: a Zipfian unigram distribution
//! (a few very frequent words, a long tail of rare ones) and recurring
//! multi-word phrases, so that raising the model order keeps paying off
//! well past trigrams. Everything is driven by one seed, which makes
//! corpora reproducible across runs and machines — handy for examples,
//! benchmarks, and trend tests that would otherwise need a bundled
//! text file.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::prep::Sentence;

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// Deterministic, injective index-to-word mapping built from
/// consonant-vowel syllables: two syllables for small indices, three
/// for large ones (distinct lengths, so the ranges cannot collide).
pub fn word(index: usize) -> String {
    let n = CONSONANTS.len() * VOWELS.len();
    assert!(index < n * n * n, "word index out of range");
    let syllable = |j: usize| [CONSONANTS[j / VOWELS.len()], VOWELS[j % VOWELS.len()]];
    let mut bytes = Vec::with_capacity(6);
    bytes.extend(syllable(index % n));
    bytes.extend(syllable((index / n) % n));
    if index >= n * n {
        bytes.extend(syllable(index / (n * n)));
    }
    String::from_utf8(bytes).expect("syllables are ASCII")
}

/// Corpus shape knobs. The defaults produce roughly 25 words per
/// sentence over a four-thousand-word vocabulary.
#[derive(Debug, Clone)]
pub struct TextGenConfig {
    pub seed: u64,
    pub sentences: usize,
    /// Number of distinct words the corpus can draw from.
    pub vocab_size: usize,
    /// Size of the stock-phrase inventory sentences are built from.
    pub phrase_count: usize,
    /// Inclusive range of content words per stock phrase, excluding
    /// the function-word decoration.
    pub phrase_len: (usize, usize),
    /// Size of the closed function-word pool (the most frequent word
    /// ranks). Phrases end in short function-word runs shared across
    /// the whole inventory, so a window near a phrase boundary stays
    /// ambiguous until the context reaches back to the content words —
    /// the graded ambiguity that makes each order increase pay off.
    pub function_words: usize,
    /// Number of distinct function-word runs ("of the"-style glue)
    /// phrases decorate themselves with. Fewer patterns mean more
    /// phrases share each one, i.e. more boundary ambiguity.
    pub glue_patterns: usize,
    /// Inclusive range of phrases concatenated per sentence.
    pub phrases_per_sentence: (usize, usize),
    /// Zipf exponent for word frequencies.
    pub word_exponent: f64,
    /// Zipf exponent for phrase reuse (lower = flatter = more variety).
    pub phrase_exponent: f64,
    /// The top-ranked phrases up to this count always emit verbatim,
    /// like the fixed collocations of natural text; they are what makes
    /// raising the model order keep paying off.
    pub verbatim_phrases: usize,
    /// For the remaining phrases, the probability that a position is
    /// re-sampled uniformly from the whole vocabulary at each use
    /// instead of keeping its stock word. Slot variation keeps rare
    /// exact word sequences from recurring, mirroring the productive
    /// tail of natural text where singleton n-grams seldom repeat.
    pub slot_noise: f64,
    /// Inclusive range of uniformly drawn words inserted between
    /// consecutive phrases. Connectors give frequent words diverse
    /// neighbors and make the windows that span phrase boundaries
    /// genuinely novel.
    pub connector_words: (usize, usize),
    /// Probability that a phrase is followed directly by its fixed
    /// designated successor instead of an independent draw. Successor
    /// chains produce the long recurring runs that make 7-gram models
    /// outperform 5-gram ones.
    pub follow_prob: f64,
}

impl TextGenConfig {
    pub fn new(seed: u64, sentences: usize) -> Self {
        TextGenConfig {
            seed,
            sentences,
            vocab_size: 4000,
            phrase_count: 600,
            phrase_len: (2, 8),
            function_words: 25,
            glue_patterns: 12,
            phrases_per_sentence: (2, 4),
            word_exponent: 1.05,
            phrase_exponent: 0.85,
            verbatim_phrases: 130,
            slot_noise: 0.4,
            connector_words: (0, 2),
            follow_prob: 0.55,
        }
    }
}

/// Zipf-distributed index sampler over `0..n`.
struct Zipf {
    cumulative: Vec<f64>,
}

impl Zipf {
    fn new(n: usize, exponent: f64) -> Self {
        assert!(n > 0);
        let mut cumulative = Vec::with_capacity(n);
        let mut total = 0.0;
        for rank in 1..=n {
            total += 1.0 / (rank as f64).powf(exponent);
            cumulative.push(total);
        }
        Zipf { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty distribution");
        let u = rng.gen_range(0.0..total);
        self.cumulative.partition_point(|&c| c <= u)
    }
}

/// Generate a corpus of tokenized sentences. Identical configurations
/// yield identical corpora.
pub fn generate(config: &TextGenConfig) -> Vec<Sentence> {
    assert!(config.vocab_size > 0 && config.phrase_count > 0);
    assert!(config.phrase_len.0 >= 1 && config.phrase_len.0 <= config.phrase_len.1);
    assert!(
        config.phrases_per_sentence.0 >= 1
            && config.phrases_per_sentence.0 <= config.phrases_per_sentence.1
    );
    assert!(config.function_words >= 1 && config.function_words <= config.vocab_size);
    assert!(config.glue_patterns >= 1);
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let words = Zipf::new(config.vocab_size, config.word_exponent);
    let functions = Zipf::new(config.function_words, 1.0);
    // Short runs of function words reused across phrases. A run of
    // three or four shared words keeps the identifying content word
    // 4-6 positions behind a phrase boundary, so trigram contexts are
    // ambiguous there, 5-gram contexts resolve some boundaries, and
    // 7-gram contexts resolve most of the rest.
    let glue: Vec<Vec<String>> = (0..config.glue_patterns)
        .map(|_| {
            let len = rng.gen_range(3..=4);
            (0..len).map(|_| word(functions.sample(&mut rng))).collect()
        })
        .collect();
    let phrases: Vec<Vec<String>> = (0..config.phrase_count)
        .map(|_| {
            let mut phrase: Vec<String> = Vec::new();
            if rng.gen_bool(0.5) {
                phrase.push(word(functions.sample(&mut rng)));
            }
            let len = rng.gen_range(config.phrase_len.0..=config.phrase_len.1);
            phrase.extend((0..len).map(|_| word(words.sample(&mut rng))));
            phrase.extend(glue[rng.gen_range(0..config.glue_patterns)].iter().cloned());
            phrase
        })
        .collect();
    let phrase_pick = Zipf::new(config.phrase_count, config.phrase_exponent);
    let successor: Vec<usize> = (0..config.phrase_count)
        .map(|_| phrase_pick.sample(&mut rng))
        .collect();

    let mut corpus = Vec::with_capacity(config.sentences);
    for _ in 0..config.sentences {
        let count = rng.gen_range(config.phrases_per_sentence.0..=config.phrases_per_sentence.1);
        let mut sentence: Sentence = Vec::new();
        let mut pick = phrase_pick.sample(&mut rng);
        for p in 0..count {
            if p > 0 {
                if rng.gen_bool(config.follow_prob) {
                    // collocation chain: the fixed successor, no glue
                    pick = successor[pick];
                } else {
                    let connectors =
                        rng.gen_range(config.connector_words.0..=config.connector_words.1);
                    for _ in 0..connectors {
                        sentence.push(word(rng.gen_range(0..config.vocab_size)));
                    }
                    pick = phrase_pick.sample(&mut rng);
                }
            }
            let vary = pick >= config.verbatim_phrases && config.slot_noise > 0.0;
            for stock in &phrases[pick] {
                if vary && rng.gen_bool(config.slot_noise) {
                    sentence.push(word(rng.gen_range(0..config.vocab_size)));
                } else {
                    sentence.push(stock.clone());
                }
            }
        }
        corpus.push(sentence);
    }
    corpus
}
