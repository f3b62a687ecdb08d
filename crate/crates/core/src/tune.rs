//! Seeded uniform random search over edit weights and the delta gap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraint::{ConstraintSet, EditWeights};
use crate::decoder::{decode, DecodeError, DecoderConfig};
use crate::metrics::{corpus_sari, DelMode};
use crate::scorer::Scorer;
use crate::tokens::TokenSeq;

pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("at least one trial is required")]
    ZeroTrials,
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("trial {trial}: {source}")]
    Objective { trial: usize, source: DecodeError },
}

/// Closed range sampled uniformly; `lo == hi` pins the value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn fixed(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn at(&self, u: f64) -> f64 {
        self.lo + u * (self.hi - self.lo)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub lambda_insert: Interval,
    pub lambda_delete: Interval,
    pub lambda_subst: Interval,
    pub delta: Interval,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            lambda_insert: Interval::new(0.0, 1.0),
            lambda_delete: Interval::new(0.0, 1.0),
            lambda_subst: Interval::new(0.0, 1.0),
            delta: Interval::new(0.0, 2.0),
        }
    }
}

impl SearchSpace {
    fn validate(&self) -> Result<(), TuneError> {
        for (name, iv) in [
            ("lambda_insert", self.lambda_insert),
            ("lambda_delete", self.lambda_delete),
            ("lambda_subst", self.lambda_subst),
            ("delta", self.delta),
        ] {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && 0.0 <= iv.lo && iv.lo <= iv.hi) {
                return Err(TuneError::InvalidSpace(format!(
                    "{name}: [{}, {}]",
                    iv.lo, iv.hi
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub weights: EditWeights,
    pub delta: f64,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub seed: u64,
    pub best: Trial,
    pub trials: Vec<Trial>,
}

/// Draws `n_trials` parameter settings from `space` (four uniforms per
/// trial, in a fixed order), scores them in parallel and keeps the highest
/// score; the earliest trial wins ties.
pub fn random_search<F>(
    space: &SearchSpace,
    n_trials: usize,
    seed: u64,
    objective: F,
) -> Result<TuneResult, TuneError>
where
    F: Fn(&EditWeights, f64) -> Result<f64, DecodeError> + Sync,
{
    if n_trials == 0 {
        return Err(TuneError::ZeroTrials);
    }
    space.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<(EditWeights, f64)> = (0..n_trials)
        .map(|_| {
            let u: [f64; 4] = rng.gen();
            (
                EditWeights::new(
                    space.lambda_insert.at(u[0]),
                    space.lambda_delete.at(u[1]),
                    space.lambda_subst.at(u[2]),
                ),
                space.delta.at(u[3]),
            )
        })
        .collect();
    let trials: Vec<Trial> = params
        .par_iter()
        .enumerate()
        .map(|(index, (w, d))| {
            objective(w, *d)
                .map(|score| Trial {
                    index,
                    weights: *w,
                    delta: *d,
                    score,
                })
                .map_err(|source| TuneError::Objective {
                    trial: index,
                    source,
                })
        })
        .collect::<Result<_, _>>()?;
    let best = trials
        .iter()
        .fold(None::<&Trial>, |best, t| match best {
            Some(b) if b.score >= t.score => Some(b),
            _ => Some(t),
        })
        .expect("at least one trial")
        .clone();
    for t in &trials {
        log::debug!(
            "trial {} score {:.4} weights {:?} delta {:.4}",
            t.index,
            t.score,
            t.weights,
            t.delta
        );
    }
    Ok(TuneResult { seed, best, trials })
}

/// Validation data for scoring a parameter setting by corpus SARI.
pub struct Validation<'a, S: Scorer + ?Sized> {
    pub scorer: &'a S,
    pub sources: &'a [TokenSeq],
    pub references: &'a [Vec<TokenSeq>],
    pub constraints: &'a [ConstraintSet],
    pub config: DecoderConfig,
    pub del_mode: DelMode,
}

impl<S: Scorer + ?Sized> Validation<'_, S> {
    pub fn outputs(&self, weights: &EditWeights, delta: f64) -> Result<Vec<TokenSeq>, DecodeError> {
        let cfg = DecoderConfig {
            delta,
            trace: false,
            ..self.config.clone()
        };
        self.sources
            .par_iter()
            .zip(self.constraints)
            .map(|(s, cs)| {
                let cs = cs.clone().with_weights(*weights);
                decode(s, self.scorer, &cs, &cfg).map(|r| r.output)
            })
            .collect()
    }

    pub fn sari(&self, weights: &EditWeights, delta: f64) -> Result<f64, DecodeError> {
        let outs = self.outputs(weights, delta)?;
        Ok(
            corpus_sari(self.sources, &outs, self.references, self.del_mode)
                .map_err(|e| DecodeError::InvalidConfig(e.to_string()))?
                .overall,
        )
    }
}
