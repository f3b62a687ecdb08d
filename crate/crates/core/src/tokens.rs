//! Word-level tokenization.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Deref;

/// An ordered sequence of non-empty word tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Builds a sequence from already-split tokens, dropping empty strings.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(
            tokens
                .into_iter()
                .map(Into::into)
                .filter(|t: &String| !t.is_empty())
                .collect(),
        )
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn push(&mut self, token: impl Into<String>) {
        let token = token.into();
        if !token.is_empty() {
            self.0.push(token);
        }
    }

    /// True when `phrase` occurs as a contiguous run of tokens.
    pub fn contains_phrase(&self, phrase: &[String]) -> bool {
        !phrase.is_empty() && self.0.windows(phrase.len()).any(|w| w == phrase)
    }

    pub fn lowercased(&self) -> TokenSeq {
        Self(self.0.iter().map(|t| t.to_lowercase()).collect())
    }
}

impl Deref for TokenSeq {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&detokenize(self))
    }
}

impl From<&str> for TokenSeq {
    fn from(text: &str) -> Self {
        tokenize(text)
    }
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || (!c.is_alphanumeric() && !c.is_whitespace())
}

/// Splits on whitespace, then peels punctuation characters off both ends of
/// each word. Interior punctuation ("11,000", "don't") stays attached.
pub fn tokenize(text: &str) -> TokenSeq {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let chars: Vec<(usize, char)> = word.char_indices().collect();
        let mut lo = 0;
        while lo < chars.len() && is_punct(chars[lo].1) {
            lo += 1;
        }
        if lo == chars.len() {
            out.extend(chars.iter().map(|(_, c)| c.to_string()));
            continue;
        }
        let mut hi = chars.len();
        while hi > lo && is_punct(chars[hi - 1].1) {
            hi -= 1;
        }
        out.extend(chars[..lo].iter().map(|(_, c)| c.to_string()));
        let start = chars[lo].0;
        let end = if hi == chars.len() {
            word.len()
        } else {
            chars[hi].0
        };
        out.push(word[start..end].to_string());
        out.extend(chars[hi..].iter().map(|(_, c)| c.to_string()));
    }
    TokenSeq(out)
}

/// Joins tokens with single spaces.
pub fn detokenize(tokens: &[String]) -> String {
    tokens.join(" ")
}
