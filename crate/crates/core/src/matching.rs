//! Incremental phrase matching over a token stream.
//!
//! A [`Phrase`] carries a failure table so that a match state can be advanced
//! one token at a time without rescanning the hypothesis. States run from 0
//! (nothing matched) to `len` (phrase just completed).

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phrase<T> {
    tokens: Vec<T>,
    // fail[k] = length of the longest proper border of tokens[..k]
    fail: Vec<usize>,
}

impl<T: PartialEq> Phrase<T> {
    /// Returns `None` for an empty phrase.
    pub fn new(tokens: Vec<T>) -> Option<Self> {
        if tokens.is_empty() {
            return None;
        }
        let n = tokens.len();
        let mut fail = vec![0; n + 1];
        let mut k = 0;
        for i in 1..n {
            while k > 0 && tokens[i] != tokens[k] {
                k = fail[k];
            }
            if tokens[i] == tokens[k] {
                k += 1;
            }
            fail[i + 1] = k;
        }
        Some(Self { tokens, fail })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[T] {
        &self.tokens
    }

    fn resume(&self, matched: usize) -> usize {
        if matched >= self.tokens.len() {
            self.fail[self.tokens.len()]
        } else {
            matched
        }
    }

    /// Successor of `matched` after reading `token`.
    pub fn advance(&self, matched: usize, token: &T) -> usize {
        let mut k = self.resume(matched);
        loop {
            if self.tokens[k] == *token {
                return k + 1;
            }
            if k == 0 {
                return 0;
            }
            k = self.fail[k];
        }
    }

    /// True when reading `token` from state `matched` completes the phrase.
    pub fn completes(&self, matched: usize, token: &T) -> bool {
        self.advance(matched, token) == self.tokens.len()
    }

    /// The token that extends the current partial match.
    pub fn next_expected(&self, matched: usize) -> &T {
        &self.tokens[self.resume(matched)]
    }
}

/// Which phrase of a constraint a [`MatchState`] tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhraseRole {
    Insert,
    Delete,
    SubstFrom,
    /// Index into the substitution's alternatives.
    SubstTo(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchState {
    pub constraint_index: usize,
    pub phrase_role: PhraseRole,
    pub matched_prefix_len: usize,
}

impl MatchState {
    pub fn new(constraint_index: usize, phrase_role: PhraseRole) -> Self {
        Self {
            constraint_index,
            phrase_role,
            matched_prefix_len: 0,
        }
    }

    pub fn advance<T: PartialEq>(&self, phrase: &Phrase<T>, token: &T) -> MatchState {
        MatchState {
            matched_prefix_len: phrase.advance(self.matched_prefix_len, token),
            ..*self
        }
    }

    pub fn is_complete<T: PartialEq>(&self, phrase: &Phrase<T>) -> bool {
        self.matched_prefix_len == phrase.len()
    }
}

/// Free-function form of [`MatchState::advance`] over string tokens.
pub fn advance_match(state: MatchState, phrase: &Phrase<String>, token: &str) -> MatchState {
    state.advance(phrase, &token.to_string())
}
