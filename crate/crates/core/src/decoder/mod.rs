//! Edit-constrained beam search.
//!
//! Each timestep expands every live hypothesis into a sibling set, scores the
//! siblings against the edit constraints, prunes the pooled candidates by
//! likelihood (top-alpha) and by edit-score gap (delta), groups survivors by
//! constraint status, and fills the next beam round-robin across groups.

mod compile;
mod plain;
mod search;
pub mod trace;

pub use compile::{CompiledConstraints, EditEvent, EditEventKind, EditOutcome, EditTally};
pub use plain::{plain_beam_search, PlainOutput};
pub use search::{decode, group_and_select, prune, CandidateNode, ConstrainedSearch};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraint::ConstraintSet;
use crate::scorer::{Scorer, ScorerError, TokenId, Vocabulary};
use crate::state::SatisfactionState;
use crate::tokens::TokenSeq;
use trace::TraceStep;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("invalid decoder configuration: {0}")]
    InvalidConfig(String),
    #[error("scorer vocabulary is empty")]
    EmptyVocabulary,
    #[error(transparent)]
    Scorer(#[from] ScorerError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderConfig {
    pub beam_size: usize,
    /// Natural sibling-set size per hypothesis; defaults to `beam_size`.
    pub fanout: Option<usize>,
    /// Pooled likelihood cap; defaults to `beam_size * fanout`.
    pub alpha: Option<usize>,
    /// Candidates trailing the best edit score by more than this are dropped.
    pub delta: f64,
    /// Maximum number of generated tokens, EOS included.
    pub max_len: usize,
    /// Length-normalized score is `logprob / max(1, len)^gamma`.
    pub length_norm_gamma: f64,
    /// Compare constraint tokens case-insensitively.
    pub case_fold: bool,
    /// Record a per-timestep trace in the result.
    pub trace: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            beam_size: 20,
            fanout: None,
            alpha: None,
            delta: 0.12,
            max_len: 64,
            length_norm_gamma: 1.0,
            case_fold: false,
            trace: false,
        }
    }
}

impl DecoderConfig {
    pub fn fanout(&self) -> usize {
        self.fanout.unwrap_or(self.beam_size)
    }

    pub fn alpha(&self) -> usize {
        self.alpha
            .unwrap_or(self.beam_size.saturating_mul(self.fanout()))
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        let bad = |m: &str| Err(DecodeError::InvalidConfig(m.to_string()));
        if self.beam_size == 0 {
            return bad("beam_size must be at least 1");
        }
        if self.fanout() == 0 {
            return bad("fanout must be at least 1");
        }
        if self.alpha() == 0 {
            return bad("alpha must be at least 1");
        }
        if self.delta.is_nan() || self.delta < 0.0 {
            return bad("delta must be non-negative");
        }
        if self.max_len == 0 {
            return bad("max_len must be at least 1");
        }
        if !(self.length_norm_gamma >= 0.0 && self.length_norm_gamma.is_finite()) {
            return bad("length_norm_gamma must be finite and non-negative");
        }
        Ok(())
    }

    pub fn normalize(&self, logprob: f64, len: usize) -> f64 {
        logprob / (len.max(1) as f64).powf(self.length_norm_gamma)
    }
}

/// A partial or finished output.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    /// Generated ids, EOS included once finished.
    pub tokens: Vec<TokenId>,
    pub logprob: f64,
    pub tally: EditTally,
    pub edit_score: f64,
    /// Per-step edit deltas along the path.
    pub deltas: Vec<f64>,
    pub sat: SatisfactionState,
    pub finished: bool,
}

impl Hypothesis {
    pub fn root(sat: SatisfactionState) -> Self {
        Self {
            tokens: Vec::new(),
            logprob: 0.0,
            tally: EditTally::default(),
            edit_score: 0.0,
            deltas: Vec::new(),
            sat,
            finished: false,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn normalized(&self, cfg: &DecoderConfig) -> f64 {
        cfg.normalize(self.logprob, self.len())
    }

    pub fn output(&self, vocab: &Vocabulary) -> TokenSeq {
        vocab.decode(&self.tokens)
    }
}

#[derive(Clone, Debug)]
pub struct DecodeResult {
    pub best: Hypothesis,
    pub output: TokenSeq,
    /// Finished hypotheses in the order they left the beam.
    pub finished_pool: Vec<Hypothesis>,
    /// True when nothing reached EOS within `max_len`.
    pub truncated: bool,
    /// Constraints that reference tokens the scorer cannot produce.
    pub unreachable: Vec<usize>,
    pub trace: Option<Vec<TraceStep>>,
}

/// Decodes each source under its own constraint set, in parallel on the
/// current rayon pool; results keep input order.
pub fn decode_batch<S: Scorer + ?Sized>(
    sources: &[TokenSeq],
    scorer: &S,
    sets: &[ConstraintSet],
    cfg: &DecoderConfig,
) -> Vec<Result<DecodeResult, DecodeError>> {
    assert_eq!(sources.len(), sets.len(), "one constraint set per source");
    sources
        .par_iter()
        .zip(sets)
        .map(|(s, cs)| decode(s, scorer, cs, cfg))
        .collect()
}

/// Unconstrained counterpart of [`decode_batch`].
pub fn plain_batch<S: Scorer + ?Sized>(
    sources: &[TokenSeq],
    scorer: &S,
    cfg: &DecoderConfig,
) -> Vec<Result<PlainOutput, DecodeError>> {
    sources
        .par_iter()
        .map(|s| plain_beam_search(s, scorer, cfg))
        .collect()
}
