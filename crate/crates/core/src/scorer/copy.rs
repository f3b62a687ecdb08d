use super::{log_normalize, Scorer, ScorerError, TokenId, Vocabulary};

/// Mixes a base model with a uniform distribution over the source tokens and
/// EOS: `p = mu * uniform(source ∪ {EOS}) + (1 - mu) * base`.
///
/// A high `copy_weight` makes decoding conservative: the output tends to
/// reproduce the source.
#[derive(Clone, Debug)]
pub struct CopyBiasedScorer<S> {
    base: S,
    copy_weight: f64,
}

impl<S: Scorer> CopyBiasedScorer<S> {
    pub fn new(base: S, copy_weight: f64) -> Result<Self, ScorerError> {
        if !(0.0..=1.0).contains(&copy_weight) {
            return Err(ScorerError::InvalidModel(format!(
                "copy weight must lie in [0, 1], got {copy_weight}"
            )));
        }
        Ok(Self { base, copy_weight })
    }

    pub fn base(&self) -> &S {
        &self.base
    }

    pub fn copy_weight(&self) -> f64 {
        self.copy_weight
    }
}

impl<S: Scorer> Scorer for CopyBiasedScorer<S> {
    fn vocab(&self) -> &Vocabulary {
        self.base.vocab()
    }

    fn score_next(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        if self.copy_weight == 0.0 {
            return self.base.score_next(source, prefix);
        }
        let v = self.vocab().len();
        let mut support = vec![false; v];
        support[self.vocab().eos() as usize] = true;
        for &t in source {
            support[t as usize] = true;
        }
        let n = support.iter().filter(|&&s| s).count() as f64;
        let mu = self.copy_weight;
        let base = if mu == 1.0 {
            vec![f64::NEG_INFINITY; v]
        } else {
            self.base.score_next(source, prefix)?
        };
        let mixed: Vec<f64> = base
            .iter()
            .zip(&support)
            .map(|(&lp, &s)| {
                let copy = if s { mu / n } else { 0.0 };
                copy + (1.0 - mu) * lp.exp()
            })
            .collect();
        Ok(log_normalize(&mixed))
    }
}
