//! Word/id mapping with reserved sentence-boundary and unknown markers.

use std::collections::HashMap;

use thiserror::Error;

/// Surface form of the begin-of-sentence marker.
pub const BOS_TOKEN: &str = "<s>";
/// Surface form of the end-of-sentence marker.
pub const EOS_TOKEN: &str = "</s>";
/// Surface form of the unknown-word marker.
pub const UNK_TOKEN: &str = "<unk>";

/// Dense integer id of a vocabulary entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordId(pub u32);

impl WordId {
    pub const BOS: WordId = WordId(0);
    pub const EOS: WordId = WordId(1);
    pub const UNK: WordId = WordId(2);
}

#[derive(Debug, Error)]
pub enum VocabError {
    /// Reserved markers are inserted by the toolkit itself and must never
    /// appear as surface tokens in a corpus.
    #[error("reserved marker {0:?} appears as a surface token")]
    ReservedToken(String),
    #[error("token {0:?} is not in the vocabulary")]
    UnknownToken(String),
}

/// Bidirectional word/id map. Ids are dense from 0, with `<s>`, `</s>` and
/// `<unk>` occupying the first three slots; surface words follow in first
/// occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    word_to_id: HashMap<String, WordId>,
    id_to_word: Vec<String>,
}

impl Vocabulary {
    /// Vocabulary holding only the reserved markers.
    pub fn new() -> Self {
        let mut v = Vocabulary {
            word_to_id: HashMap::new(),
            id_to_word: Vec::new(),
        };
        for tok in [BOS_TOKEN, EOS_TOKEN, UNK_TOKEN] {
            let id = WordId(v.id_to_word.len() as u32);
            v.word_to_id.insert(tok.to_string(), id);
            v.id_to_word.push(tok.to_string());
        }
        v
    }

    /// Build a vocabulary from a training corpus, assigning ids in first
    /// occurrence order. Rejects corpora that contain the reserved markers
    /// as surface tokens.
    pub fn from_corpus<I, S, T>(sentences: I) -> Result<Self, VocabError>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let mut v = Vocabulary::new();
        for sentence in sentences {
            for token in sentence {
                let token = token.as_ref();
                if token == BOS_TOKEN || token == EOS_TOKEN || token == UNK_TOKEN {
                    return Err(VocabError::ReservedToken(token.to_string()));
                }
                v.intern(token);
            }
        }
        Ok(v)
    }

    /// Insert `token` if absent and return its id.
    pub fn intern(&mut self, token: &str) -> WordId {
        if let Some(&id) = self.word_to_id.get(token) {
            return id;
        }
        let id = WordId(self.id_to_word.len() as u32);
        self.word_to_id.insert(token.to_string(), id);
        self.id_to_word.push(token.to_string());
        id
    }

    pub fn id(&self, token: &str) -> Option<WordId> {
        self.word_to_id.get(token).copied()
    }

    /// Id for a test-time token: unknown words map to `<unk>`.
    pub fn id_or_unk(&self, token: &str) -> WordId {
        self.id(token).unwrap_or(WordId::UNK)
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.id_to_word[id.0 as usize]
    }

    pub fn contains(&self, token: &str) -> bool {
        self.word_to_id.contains_key(token)
    }

    /// Total number of entries including the three reserved markers.
    pub fn len(&self) -> usize {
        self.id_to_word.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the reserved markers are always present
    }

    /// Number of surface words (reserved markers excluded).
    pub fn surface_len(&self) -> usize {
        self.id_to_word.len() - 3
    }

    /// Ids of every word that can be a predicted event: all surface words
    /// plus `</s>`. `<s>` and `<unk>` are excluded.
    pub fn event_ids(&self) -> impl Iterator<Item = WordId> + '_ {
        std::iter::once(WordId::EOS).chain((3..self.id_to_word.len() as u32).map(WordId))
    }

    pub fn is_reserved(id: WordId) -> bool {
        id.0 < 3
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::new()
    }
}
