use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Scorer, ScorerError, TokenId, Vocabulary};

/// Every entry gets `ln(1/|V|)`.
#[derive(Clone, Debug)]
pub struct UniformScorer {
    vocab: Vocabulary,
}

impl UniformScorer {
    pub fn new(vocab: Vocabulary) -> Self {
        Self { vocab }
    }
}

impl Scorer for UniformScorer {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn score_next(
        &self,
        _source: &[TokenId],
        _prefix: &[TokenId],
    ) -> Result<Vec<f64>, ScorerError> {
        let v = self.vocab.len();
        Ok(vec![(1.0 / v as f64).ln(); v])
    }
}

/// Deterministic pseudo-random distributions: each (source, prefix) pair is
/// hashed together with `seed` to draw a fresh softmax over random logits.
/// Used to exercise the search on arbitrary but reproducible models.
#[derive(Clone, Debug)]
pub struct RandomScorer {
    vocab: Vocabulary,
    seed: u64,
    spread: f64,
}

impl RandomScorer {
    /// Logits are drawn uniformly from `[-spread, spread]`.
    pub fn new(vocab: Vocabulary, seed: u64, spread: f64) -> Self {
        Self {
            vocab,
            seed,
            spread,
        }
    }

    fn key(&self, source: &[TokenId], prefix: &[TokenId]) -> u64 {
        // FNV-1a over the seed, a separator, and both id lists
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        mix(self.seed);
        for &t in source {
            mix(t as u64);
        }
        mix(u64::MAX);
        for &t in prefix {
            mix(t as u64);
        }
        h
    }
}

impl Scorer for RandomScorer {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn score_next(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.key(source, prefix));
        let logits: Vec<f64> = (0..self.vocab.len())
            .map(|_| rng.gen_range(-self.spread..=self.spread))
            .collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        Ok(logits.into_iter().map(|l| l - lse).collect())
    }
}
