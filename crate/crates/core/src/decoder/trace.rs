//! Per-timestep decoding trace, written as one JSON object per line.
//!
//! Timesteps number lattice positions: position 1 is the BOS node, so the
//! first generated token is decided at timestep 2.

use serde::{Deserialize, Serialize};

use super::EditEvent;
use crate::state::GroupKey;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRef {
    pub set: usize,
    pub token: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeTrace {
    pub token: String,
    /// Added to the sibling set by a pending insertion/substitution rather
    /// than by likelihood.
    pub injected: bool,
    pub incr_logprob: f64,
    pub logprob: f64,
    pub normalized: f64,
    pub edit_delta: f64,
    pub edit_score: f64,
    pub events: Vec<EditEvent>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiblingSetTrace {
    pub id: usize,
    /// Output of the parent hypothesis.
    pub parent: Vec<String>,
    pub parent_edit_score: f64,
    pub nodes: Vec<NodeTrace>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupTrace {
    pub key: GroupKey,
    pub satisfied: usize,
    pub members: Vec<NodeRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectedTrace {
    /// Position in the new beam.
    pub beam: usize,
    pub set: usize,
    pub token: String,
    pub output: Vec<String>,
    pub edit_score: f64,
    pub normalized: f64,
    pub finished: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub timestep: usize,
    pub sibling_sets: Vec<SiblingSetTrace>,
    pub alpha_pruned: Vec<NodeRef>,
    /// Minimum edit score kept by delta pruning, when finite.
    pub delta_threshold: Option<f64>,
    pub delta_pruned: Vec<NodeRef>,
    pub groups: Vec<GroupTrace>,
    pub selected: Vec<SelectedTrace>,
}

impl TraceStep {
    pub fn sibling_set(&self, id: usize) -> Option<&SiblingSetTrace> {
        self.sibling_sets.iter().find(|s| s.id == id)
    }

    /// Node chosen into beam slot `beam` (0-based), with its sibling set.
    pub fn selected_node(&self, beam: usize) -> Option<(&SiblingSetTrace, &NodeTrace)> {
        let sel = self.selected.get(beam)?;
        let set = self.sibling_set(sel.set)?;
        let node = set.nodes.iter().find(|n| n.token == sel.token)?;
        Some((set, node))
    }
}
