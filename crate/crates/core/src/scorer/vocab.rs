use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use super::ScorerError;
use crate::tokens::TokenSeq;

pub type TokenId = u32;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

/// Bijective token <-> id mapping with reserved BOS and EOS entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabRepr", into = "VocabRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
    bos: TokenId,
    eos: TokenId,
    unk: Option<TokenId>,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    tokens: Vec<String>,
    bos: TokenId,
    eos: TokenId,
}

impl TryFrom<VocabRepr> for Vocabulary {
    type Error = ScorerError;

    fn try_from(r: VocabRepr) -> Result<Self, Self::Error> {
        Vocabulary::from_parts(r.tokens, r.bos, r.eos)
    }
}

impl From<Vocabulary> for VocabRepr {
    fn from(v: Vocabulary) -> Self {
        VocabRepr {
            tokens: v.tokens,
            bos: v.bos,
            eos: v.eos,
        }
    }
}

impl Vocabulary {
    /// Reserved symbols take ids 0 (BOS), 1 (EOS) and 2 (UNK); the given
    /// tokens follow in order, duplicates and reserved names skipped.
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut all: Vec<String> = vec![BOS.into(), EOS.into(), UNK.into()];
        let mut index: HashMap<String, TokenId> = all
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        for t in tokens {
            let t = t.as_ref();
            if t.is_empty() || index.contains_key(t) {
                continue;
            }
            index.insert(t.to_string(), all.len() as TokenId);
            all.push(t.to_string());
        }
        Self {
            tokens: all,
            index,
            bos: 0,
            eos: 1,
            unk: Some(2),
        }
    }

    /// Builds a vocabulary from an explicit token list, as received from an
    /// external scorer. `<unk>` is used for unknown tokens when present.
    pub fn from_parts(
        tokens: Vec<String>,
        bos: TokenId,
        eos: TokenId,
    ) -> Result<Self, ScorerError> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() {
                return Err(ScorerError::InvalidVocabulary(format!(
                    "empty token at {i}"
                )));
            }
            if index.insert(t.clone(), i as TokenId).is_some() {
                return Err(ScorerError::InvalidVocabulary(format!(
                    "duplicate token {t:?}"
                )));
            }
        }
        let n = tokens.len() as TokenId;
        if bos >= n || eos >= n || bos == eos {
            return Err(ScorerError::InvalidVocabulary(format!(
                "bad reserved ids bos={bos} eos={eos} for {n} tokens"
            )));
        }
        let unk = index.get(UNK).copied();
        Ok(Self {
            tokens,
            index,
            bos,
            eos,
            unk,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn bos(&self) -> TokenId {
        self.bos
    }

    pub fn eos(&self) -> TokenId {
        self.eos
    }

    pub fn unk(&self) -> Option<TokenId> {
        self.unk
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id as usize]
    }

    /// True for ids a decoder may emit (everything except BOS and UNK).
    pub fn is_generable(&self, id: TokenId) -> bool {
        id != self.bos && Some(id) != self.unk
    }

    /// Maps tokens to ids, sending unknown tokens to UNK (or dropping them
    /// when this vocabulary has no UNK entry).
    pub fn encode(&self, tokens: &[String]) -> Vec<TokenId> {
        tokens
            .iter()
            .filter_map(|t| self.id(t).or(self.unk))
            .collect()
    }

    /// Maps ids back to tokens, skipping BOS and EOS.
    pub fn decode(&self, ids: &[TokenId]) -> TokenSeq {
        TokenSeq::from_tokens(
            ids.iter()
                .filter(|&&i| i != self.bos && i != self.eos)
                .map(|&i| self.token(i).to_string()),
        )
    }
}
