use super::{DecodeError, DecoderConfig};
use crate::scorer::{Scorer, TokenId};
use crate::tokens::TokenSeq;

#[derive(Clone, Debug, PartialEq)]
pub struct PlainOutput {
    pub tokens: Vec<TokenId>,
    pub output: TokenSeq,
    pub logprob: f64,
    pub truncated: bool,
}

/// Unconstrained beam search with length-normalized ranking. Uses the same
/// fanout, alpha and tie-breaking as the constrained decoder.
pub fn plain_beam_search<S: Scorer + ?Sized>(
    source: &TokenSeq,
    scorer: &S,
    cfg: &DecoderConfig,
) -> Result<PlainOutput, DecodeError> {
    cfg.validate()?;
    let vocab = scorer.vocab();
    if vocab.is_empty() {
        return Err(DecodeError::EmptyVocabulary);
    }
    let src = vocab.encode(source);
    let keep = cfg.beam_size.min(cfg.alpha());

    let mut beam: Vec<(Vec<TokenId>, f64)> = vec![(Vec::new(), 0.0)];
    let mut finished: Vec<(Vec<TokenId>, f64)> = Vec::new();
    for _ in 0..cfg.max_len {
        // (normalized, parent, token, logprob)
        let mut pool: Vec<(f64, usize, TokenId, f64)> = Vec::new();
        for (pi, (prefix, lp)) in beam.iter().enumerate() {
            let next = scorer.score_next(&src, prefix)?;
            let mut ids: Vec<TokenId> = (0..next.len() as TokenId)
                .filter(|&t| vocab.is_generable(t))
                .collect();
            ids.sort_by(|&a, &b| {
                next[b as usize]
                    .total_cmp(&next[a as usize])
                    .then(a.cmp(&b))
            });
            for &t in ids.iter().take(cfg.fanout()) {
                let total = lp + next[t as usize];
                pool.push((cfg.normalize(total, prefix.len() + 1), pi, t, total));
            }
        }
        if pool.is_empty() {
            break;
        }
        pool.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        pool.truncate(keep);
        let mut next_beam = Vec::new();
        for (_, pi, t, total) in pool {
            let mut toks = beam[pi].0.clone();
            toks.push(t);
            if t == vocab.eos() {
                finished.push((toks, total));
            } else {
                next_beam.push((toks, total));
            }
        }
        beam = next_beam;
        if beam.is_empty() {
            break;
        }
    }

    let best = |pool: &[(Vec<TokenId>, f64)]| {
        let mut best: Option<&(Vec<TokenId>, f64)> = None;
        for h in pool {
            let score = cfg.normalize(h.1, h.0.len());
            if best.map_or(true, |b| score > cfg.normalize(b.1, b.0.len())) {
                best = Some(h);
            }
        }
        best.cloned()
    };
    let (chosen, truncated) = match best(&finished) {
        Some(h) => (h, false),
        None => (best(&beam).unwrap_or((Vec::new(), 0.0)), true),
    };
    Ok(PlainOutput {
        output: vocab.decode(&chosen.0),
        tokens: chosen.0,
        logprob: chosen.1,
        truncated,
    })
}
