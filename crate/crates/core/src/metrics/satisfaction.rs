use serde::{Deserialize, Serialize};

use super::{check_len, MetricError};
use crate::constraint::{Constraint, ConstraintKind, ConstraintSet};
use crate::tokens::TokenSeq;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeRate {
    pub satisfied: usize,
    pub total: usize,
}

impl TypeRate {
    /// Percentage satisfied; `None` when there were no constraints.
    pub fn percent(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.satisfied as f64 / self.total as f64)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SatisfactionRates {
    pub insertion: TypeRate,
    pub deletion: TypeRate,
    pub substitution: TypeRate,
}

impl SatisfactionRates {
    pub fn get(&self, kind: ConstraintKind) -> &TypeRate {
        match kind {
            ConstraintKind::Insertion => &self.insertion,
            ConstraintKind::Deletion => &self.deletion,
            ConstraintKind::Substitution => &self.substitution,
        }
    }

    fn get_mut(&mut self, kind: ConstraintKind) -> &mut TypeRate {
        match kind {
            ConstraintKind::Insertion => &mut self.insertion,
            ConstraintKind::Deletion => &mut self.deletion,
            ConstraintKind::Substitution => &mut self.substitution,
        }
    }
}

/// Whether `output` satisfies `c` by surface occurrence.
pub fn is_satisfied(c: &Constraint, output: &TokenSeq) -> bool {
    match c {
        Constraint::Insertion { phrase } => output.contains_phrase(phrase),
        Constraint::Deletion { phrase } => !output.contains_phrase(phrase),
        Constraint::Substitution { from, to } => {
            !output.contains_phrase(from) && to.iter().any(|t| output.contains_phrase(t))
        }
    }
}

pub fn satisfaction_rate(
    outputs: &[TokenSeq],
    sets: &[ConstraintSet],
) -> Result<SatisfactionRates, MetricError> {
    check_len("constraint sets", outputs.len(), sets.len())?;
    let mut rates = SatisfactionRates::default();
    for (out, cs) in outputs.iter().zip(sets) {
        for c in cs.constraints() {
            let r = rates.get_mut(c.kind());
            r.total += 1;
            r.satisfied += is_satisfied(c, out) as usize;
        }
    }
    Ok(rates)
}
