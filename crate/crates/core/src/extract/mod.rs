//! Building constraint sets from data: oracle constraints read off word
//! alignments, and substitution candidates from a lexical translation table.

mod alignment;
mod table;

pub use alignment::{load_alignment, Alignment};
pub use table::{
    load_translation_table, substitution_candidates, table_constraints, TranslationTable,
    DEFAULT_MIN_PROB,
};

use thiserror::Error;

use crate::constraint::{Constraint, ConstraintSet, EditWeights};
use crate::tokens::TokenSeq;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error("malformed alignment item {item:?} at position {position}")]
    Malformed { position: usize, item: String },
    #[error(
        "alignment link {i}-{j} out of range for {src_len} source and {ref_len} reference tokens"
    )]
    OutOfRange {
        i: usize,
        j: usize,
        src_len: usize,
        ref_len: usize,
    },
    #[error("translation table line {line}: {message}")]
    Table { line: usize, message: String },
}

/// Oracle constraints for one sentence pair. Each source token becomes a
/// deletion when unaligned, an insertion when aligned only to identical
/// tokens, and otherwise a substitution towards the distinct differing
/// reference tokens. Unaligned reference tokens are ignored.
pub fn extract_oracle(
    src: &TokenSeq,
    reference: &TokenSeq,
    a: &Alignment,
    weights: EditWeights,
) -> Result<ConstraintSet, ExtractError> {
    a.check(src.len(), reference.len())?;
    let mut out: Vec<Constraint> = Vec::new();
    for (i, tok) in src.iter().enumerate() {
        let linked: Vec<&String> = a.targets(i).map(|j| &reference[j]).collect();
        let c = if linked.is_empty() {
            Constraint::deletion(TokenSeq::from_tokens([tok]))
        } else {
            let differing: Vec<TokenSeq> = linked
                .into_iter()
                .filter(|r| *r != tok)
                .map(|r| TokenSeq::from_tokens([r]))
                .collect();
            if differing.is_empty() {
                Constraint::insertion(TokenSeq::from_tokens([tok]))
            } else {
                Constraint::substitution(TokenSeq::from_tokens([tok]), differing)
            }
        }
        .expect("single non-empty tokens form valid constraints");
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(ConstraintSet::new(out, weights))
}
