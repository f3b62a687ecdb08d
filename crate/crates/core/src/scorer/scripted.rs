use std::collections::HashMap;

use super::{check_distribution, Scorer, ScorerError, TokenId, Vocabulary};

/// Replays explicit distributions keyed by output prefix (the timestep is the
/// prefix length). Queries for a prefix that was never scripted fail.
#[derive(Clone, Debug)]
pub struct ScriptedScorer {
    vocab: Vocabulary,
    steps: HashMap<Vec<TokenId>, Vec<f64>>,
}

impl ScriptedScorer {
    pub fn new(vocab: Vocabulary) -> Self {
        Self {
            vocab,
            steps: HashMap::new(),
        }
    }

    /// Scripts a full log-probability table for `prefix`.
    pub fn insert_logprobs(
        &mut self,
        prefix: &[&str],
        logprobs: Vec<f64>,
    ) -> Result<(), ScorerError> {
        check_distribution(&logprobs, self.vocab.len())?;
        let key = self.ids(prefix)?;
        self.steps.insert(key, logprobs);
        Ok(())
    }

    /// Scripts `prefix` from a partial table of probabilities; whatever mass
    /// is left is spread evenly over the unlisted tokens.
    pub fn step(
        &mut self,
        prefix: &[&str],
        probs: &[(&str, f64)],
    ) -> Result<&mut Self, ScorerError> {
        let v = self.vocab.len();
        let mut table = vec![None; v];
        for &(tok, p) in probs {
            let id = self.id(tok)?;
            if !(p > 0.0) {
                return Err(ScorerError::InvalidModel(format!(
                    "probability for {tok:?} must be > 0"
                )));
            }
            table[id as usize] = Some(p);
        }
        let listed: f64 = table.iter().flatten().sum();
        let rest = table.iter().filter(|p| p.is_none()).count();
        let fill = if rest == 0 {
            0.0
        } else {
            (1.0 - listed) / rest as f64
        };
        if listed > 1.0 + 1e-12 || (rest > 0 && !(fill > 0.0)) {
            return Err(ScorerError::Normalization { sum: listed });
        }
        let logprobs = table.into_iter().map(|p| p.unwrap_or(fill).ln()).collect();
        self.insert_logprobs(prefix, logprobs)?;
        Ok(self)
    }

    fn id(&self, tok: &str) -> Result<TokenId, ScorerError> {
        self.vocab
            .id(tok)
            .ok_or_else(|| ScorerError::InvalidVocabulary(format!("unknown token {tok:?}")))
    }

    fn ids(&self, prefix: &[&str]) -> Result<Vec<TokenId>, ScorerError> {
        prefix.iter().map(|t| self.id(t)).collect()
    }
}

impl Scorer for ScriptedScorer {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn score_next(&self, _source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        self.steps.get(prefix).cloned().ok_or_else(|| {
            let shown: Vec<&str> = prefix.iter().map(|&t| self.vocab.token(t)).collect();
            ScorerError::Unscripted(shown.join(" "))
        })
    }
}
