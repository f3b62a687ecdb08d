//! Simplification metrics and the evaluation report.

mod bleu;
mod fkgl;
mod report;
mod sari;
mod satisfaction;

pub use bleu::{bleu, corpus_bleu_stats, BleuStats};
pub use fkgl::{fkgl, syllables};
pub use report::{evaluate, EvaluationInput, EvaluationReport};
pub use sari::{corpus_sari, sari, DelMode, NgramSari, SariScore};
pub use satisfaction::{is_satisfied, satisfaction_rate, SatisfactionRates, TypeRate};

use thiserror::Error;

use crate::tokens::TokenSeq;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("sentence {index} has no references")]
    EmptyReferences { index: usize },
    #[error("{what}: expected {expected} lines, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("no words to score")]
    NoWords,
    #[error("no sentences to score")]
    Empty,
}

pub(crate) fn check_len(
    what: &'static str,
    expected: usize,
    found: usize,
) -> Result<(), MetricError> {
    if expected == found {
        Ok(())
    } else {
        Err(MetricError::LengthMismatch {
            what,
            expected,
            found,
        })
    }
}

/// Mean token count per output.
pub fn mean_len(outputs: &[TokenSeq]) -> Result<f64, MetricError> {
    if outputs.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(outputs.iter().map(|o| o.len()).sum::<usize>() as f64 / outputs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_len_examples() {
        assert_eq!(mean_len(&[]), Err(MetricError::Empty));
        assert_eq!(mean_len(&["a b".into(), "a".into()]).unwrap(), 1.5);
        let once: Vec<TokenSeq> = vec!["a b c".into(), "d".into()];
        let twice: Vec<TokenSeq> = once.iter().chain(&once).cloned().collect();
        assert_eq!(mean_len(&once).unwrap(), mean_len(&twice).unwrap());
    }
}
