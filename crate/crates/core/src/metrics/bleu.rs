use std::collections::HashMap;

use super::{check_len, MetricError};
use crate::tokens::TokenSeq;

/// Corpus-level n-gram statistics for n = 1..=4.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BleuStats {
    pub matches: [u64; 4],
    pub totals: [u64; 4],
    pub sys_len: u64,
    pub ref_len: u64,
}

fn counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut c = HashMap::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *c.entry(g).or_insert(0) += 1;
        }
    }
    c
}

/// Clipped match counts and lengths; the reference length of a sentence is
/// the closest reference length (shorter on ties).
pub fn corpus_bleu_stats(
    outputs: &[TokenSeq],
    references: &[Vec<TokenSeq>],
) -> Result<BleuStats, MetricError> {
    check_len("references", outputs.len(), references.len())?;
    let mut st = BleuStats::default();
    for (i, (out, refs)) in outputs.iter().zip(references).enumerate() {
        if refs.is_empty() {
            return Err(MetricError::EmptyReferences { index: i });
        }
        let out = out.lowercased();
        let refs: Vec<TokenSeq> = refs.iter().map(|r| r.lowercased()).collect();
        let hyp_len = out.len() as i64;
        let closest = refs
            .iter()
            .map(|r| r.len() as i64)
            .min_by_key(|&l| ((l - hyp_len).abs(), l))
            .expect("non-empty references");
        st.sys_len += hyp_len as u64;
        st.ref_len += closest as u64;
        for n in 1..=4 {
            let mut max_ref: HashMap<&[String], u64> = HashMap::new();
            for r in &refs {
                for (g, c) in counts(r, n) {
                    let e = max_ref.entry(g).or_insert(0);
                    *e = (*e).max(c);
                }
            }
            for (g, c) in counts(&out, n) {
                st.matches[n - 1] += c.min(max_ref.get(g).copied().unwrap_or(0));
                st.totals[n - 1] += c;
            }
        }
    }
    Ok(st)
}

impl BleuStats {
    /// 4-gram BLEU with exponential smoothing of zero-match orders and the
    /// brevity penalty, on a 0-100 scale.
    pub fn score(&self) -> f64 {
        if self.matches.iter().all(|&m| m == 0) || self.sys_len == 0 {
            return 0.0;
        }
        let mut smooth = 1.0;
        let mut log_sum = 0.0;
        for n in 0..4 {
            if self.totals[n] == 0 {
                return 0.0;
            }
            let p = if self.matches[n] == 0 {
                smooth *= 2.0;
                1.0 / (smooth * self.totals[n] as f64)
            } else {
                self.matches[n] as f64 / self.totals[n] as f64
            };
            log_sum += p.ln();
        }
        let bp = if self.sys_len >= self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.sys_len as f64).exp()
        };
        100.0 * bp * (log_sum / 4.0).exp()
    }
}

/// Corpus BLEU over lowercased tokens.
pub fn bleu(outputs: &[TokenSeq], references: &[Vec<TokenSeq>]) -> Result<f64, MetricError> {
    Ok(corpus_bleu_stats(outputs, references)?.score())
}
