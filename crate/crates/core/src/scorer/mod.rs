//! Next-token scoring backends.
//!
//! Every scorer answers the same question: given a source sentence and an
//! output prefix (both as vocabulary ids), what is the log-probability of each
//! vocabulary entry being generated next?

mod copy;
mod ngram;
pub mod protocol;
mod random;
mod scripted;
mod vocab;

pub use copy::CopyBiasedScorer;
pub use ngram::{train_ngram_lm, NGramLM};
pub use protocol::{serve_connection, ConnectOptions, ExternalScorer, ScorerServer};
pub use random::{RandomScorer, UniformScorer};
pub use scripted::ScriptedScorer;
pub use vocab::{TokenId, Vocabulary, BOS, EOS, UNK};

use crate::tokens::TokenSeq;
use std::sync::Arc;
use thiserror::Error;

/// Tolerance on `sum(exp(logprobs)) == 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScorerError {
    #[error("no scripted distribution for prefix [{0}]")]
    Unscripted(String),
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("distribution sums to {sum} instead of 1")]
    Normalization { sum: f64 },
    #[error("vocabulary mismatch: {0}")]
    VocabMismatch(String),
    #[error("scorer timed out")]
    Timeout,
    #[error("malformed reply: {0}")]
    Malformed(String),
    #[error("remote scorer error: {0}")]
    Remote(String),
    #[error("transport error: {0}")]
    Io(String),
}

pub trait Scorer: Send + Sync {
    fn vocab(&self) -> &Vocabulary;

    /// Log-probabilities over the whole vocabulary, indexed by token id.
    fn score_next(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>, ScorerError>;

    /// Convenience wrapper over [`Scorer::score_next`] taking token strings.
    fn score_tokens(&self, source: &TokenSeq, prefix: &TokenSeq) -> Result<Vec<f64>, ScorerError> {
        let v = self.vocab();
        self.score_next(&v.encode(source), &v.encode(prefix))
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }

    fn score_next(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        (**self).score_next(source, prefix)
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }

    fn score_next(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        (**self).score_next(source, prefix)
    }
}

impl<S: Scorer + ?Sized> Scorer for Arc<S> {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }

    fn score_next(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        (**self).score_next(source, prefix)
    }
}

/// Checks that `logprobs` is a finite distribution over `vocab_len` entries.
pub fn check_distribution(logprobs: &[f64], vocab_len: usize) -> Result<(), ScorerError> {
    if logprobs.len() != vocab_len {
        return Err(ScorerError::VocabMismatch(format!(
            "{} scores for a vocabulary of {vocab_len}",
            logprobs.len()
        )));
    }
    if let Some(bad) = logprobs.iter().find(|x| x.is_nan() || **x == f64::INFINITY) {
        return Err(ScorerError::Malformed(format!(
            "non-finite log-probability {bad}"
        )));
    }
    let sum: f64 = logprobs.iter().map(|x| x.exp()).sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(ScorerError::Normalization { sum });
    }
    Ok(())
}

pub(crate) fn log_normalize(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| (w / total).ln()).collect()
}
