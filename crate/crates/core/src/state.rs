//! Per-hypothesis constraint bookkeeping.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pending,
    Satisfied,
    Violated,
}

/// The status vector of a hypothesis; hypotheses with equal keys are grouped
/// together during beam selection.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupKey(Vec<Status>);

impl GroupKey {
    pub fn statuses(&self) -> &[Status] {
        &self.0
    }

    pub fn satisfied_count(&self) -> usize {
        self.0.iter().filter(|s| **s == Status::Satisfied).count()
    }
}

/// Constraint statuses, deletion violation counts, and the match progress of
/// every tracked phrase.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SatisfactionState {
    status: Vec<Status>,
    violations: Vec<u32>,
    matched: Vec<usize>,
}

impl SatisfactionState {
    pub fn new(constraints: usize, phrases: usize) -> Self {
        Self {
            status: vec![Status::Pending; constraints],
            violations: vec![0; constraints],
            matched: vec![0; phrases],
        }
    }

    pub fn status(&self, constraint: usize) -> Status {
        self.status[constraint]
    }

    pub fn statuses(&self) -> &[Status] {
        &self.status
    }

    pub fn violations(&self, constraint: usize) -> u32 {
        self.violations[constraint]
    }

    pub fn matched(&self, phrase_slot: usize) -> usize {
        self.matched[phrase_slot]
    }

    pub fn group_key(&self) -> GroupKey {
        GroupKey(self.status.clone())
    }

    pub fn satisfied_count(&self) -> usize {
        self.status
            .iter()
            .filter(|s| **s == Status::Satisfied)
            .count()
    }

    pub(crate) fn set_status(&mut self, constraint: usize, status: Status) {
        self.status[constraint] = status;
    }

    pub(crate) fn add_violation(&mut self, constraint: usize) {
        self.violations[constraint] += 1;
        self.status[constraint] = Status::Violated;
    }

    pub(crate) fn set_matched(&mut self, phrase_slot: usize, len: usize) {
        self.matched[phrase_slot] = len;
    }
}
