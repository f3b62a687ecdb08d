use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

use super::{Scorer, ScorerError, TokenId, Vocabulary};
use crate::tokens::TokenSeq;

/// Source-agnostic n-gram language model with add-k smoothing over a closed
/// vocabulary. Every vocabulary entry (reserved symbols included) receives
/// non-zero probability in every context.
#[derive(Clone, Debug, PartialEq)]
pub struct NGramLM {
    order: usize,
    k: f64,
    vocab: Vocabulary,
    // context (order-1 ids) -> (context total, next-token counts)
    table: HashMap<Vec<TokenId>, (u64, HashMap<TokenId, u64>)>,
}

#[derive(Serialize, Deserialize)]
struct NGramRepr {
    order: usize,
    k: f64,
    vocab: Vocabulary,
    /// Full n-grams (context followed by predicted token) with counts.
    counts: Vec<(Vec<TokenId>, u64)>,
}

/// Counts padded n-grams (`order - 1` BOS symbols in front, one EOS at the
/// end) and smooths with add-k. Vocabulary entries are sorted, so the model
/// does not depend on corpus sentence order.
pub fn train_ngram_lm(corpus: &[TokenSeq], order: usize, k: f64) -> Result<NGramLM, ScorerError> {
    train_ngram_lm_with_vocab(corpus, std::iter::empty::<&str>(), order, k)
}

/// As [`train_ngram_lm`], with extra tokens added to the closed vocabulary.
pub fn train_ngram_lm_with_vocab<I, S>(
    corpus: &[TokenSeq],
    extra_tokens: I,
    order: usize,
    k: f64,
) -> Result<NGramLM, ScorerError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if corpus.is_empty() {
        return Err(ScorerError::InvalidModel("empty training corpus".into()));
    }
    if order == 0 {
        return Err(ScorerError::InvalidModel("order must be at least 1".into()));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(ScorerError::InvalidModel(format!(
            "smoothing k must be > 0, got {k}"
        )));
    }
    let mut words: Vec<String> = corpus.iter().flat_map(|s| s.iter().cloned()).collect();
    words.extend(extra_tokens.into_iter().map(|t| t.as_ref().to_string()));
    words.sort();
    words.dedup();
    let vocab = Vocabulary::new(&words);

    let mut counts: BTreeMap<Vec<TokenId>, u64> = BTreeMap::new();
    for sent in corpus {
        let mut padded = vec![vocab.bos(); order - 1];
        padded.extend(vocab.encode(sent));
        padded.push(vocab.eos());
        for gram in padded.windows(order) {
            *counts.entry(gram.to_vec()).or_default() += 1;
        }
    }
    NGramLM::from_counts(order, k, vocab, counts)
}

impl NGramLM {
    fn from_counts(
        order: usize,
        k: f64,
        vocab: Vocabulary,
        counts: impl IntoIterator<Item = (Vec<TokenId>, u64)>,
    ) -> Result<Self, ScorerError> {
        let mut table: HashMap<Vec<TokenId>, (u64, HashMap<TokenId, u64>)> = HashMap::new();
        for (gram, c) in counts {
            if gram.len() != order {
                return Err(ScorerError::InvalidModel(format!(
                    "n-gram of length {} in an order-{order} model",
                    gram.len()
                )));
            }
            if gram.iter().any(|&t| t as usize >= vocab.len()) {
                return Err(ScorerError::InvalidModel(
                    "n-gram id out of vocabulary".into(),
                ));
            }
            let (ctx, w) = gram.split_at(order - 1);
            let entry = table.entry(ctx.to_vec()).or_default();
            entry.0 += c;
            *entry.1.entry(w[0]).or_default() += c;
        }
        Ok(Self {
            order,
            k,
            vocab,
            table,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> f64 {
        self.k
    }

    /// Conditional probability of `token` after the BOS-padded `prefix`.
    pub fn prob(&self, prefix: &[TokenId], token: TokenId) -> f64 {
        let ctx = self.context(prefix);
        let v = self.vocab.len() as f64;
        let (total, next) = self
            .table
            .get(&ctx)
            .map(|(t, n)| (*t, n.get(&token).copied().unwrap_or(0)))
            .unwrap_or((0, 0));
        (next as f64 + self.k) / (total as f64 + self.k * v)
    }

    fn context(&self, prefix: &[TokenId]) -> Vec<TokenId> {
        let need = self.order - 1;
        let mut ctx = Vec::with_capacity(need);
        let have = prefix.len().min(need);
        ctx.extend(std::iter::repeat(self.vocab.bos()).take(need - have));
        ctx.extend_from_slice(&prefix[prefix.len() - have..]);
        ctx
    }

    pub fn to_json(&self) -> String {
        let mut counts: Vec<(Vec<TokenId>, u64)> = self
            .table
            .iter()
            .flat_map(|(ctx, (_, next))| {
                next.iter().map(move |(&w, &c)| {
                    let mut g = ctx.clone();
                    g.push(w);
                    (g, c)
                })
            })
            .collect();
        counts.sort();
        serde_json::to_string(&NGramRepr {
            order: self.order,
            k: self.k,
            vocab: self.vocab.clone(),
            counts,
        })
        .expect("n-gram model serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, ScorerError> {
        let repr: NGramRepr =
            serde_json::from_str(json).map_err(|e| ScorerError::InvalidModel(e.to_string()))?;
        if repr.order == 0 || !(repr.k > 0.0) {
            return Err(ScorerError::InvalidModel("bad order or smoothing".into()));
        }
        Self::from_counts(repr.order, repr.k, repr.vocab, repr.counts)
    }
}

impl Scorer for NGramLM {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn score_next(&self, _source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        let ctx = self.context(prefix);
        let v = self.vocab.len();
        let (total, next) = match self.table.get(&ctx) {
            Some((t, n)) => (*t, Some(n)),
            None => (0, None),
        };
        let denom = total as f64 + self.k * v as f64;
        let base = (self.k / denom).ln();
        let mut out = vec![base; v];
        if let Some(next) = next {
            for (&w, &c) in next {
                out[w as usize] = ((c as f64 + self.k) / denom).ln();
            }
        }
        Ok(out)
    }
}
