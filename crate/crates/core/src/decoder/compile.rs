//! Constraint sets resolved against a scorer vocabulary.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

use crate::constraint::{Constraint, ConstraintKind, ConstraintSet, EditWeights};
use crate::matching::{MatchState, Phrase, PhraseRole};
use crate::scorer::{TokenId, Vocabulary};
use crate::state::{SatisfactionState, Status};

/// Net event counts per operation. Edit scores are computed from these so
/// that two paths with the same events get bit-identical scores.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EditTally {
    pub insert_rewards: i32,
    pub delete_penalties: i32,
    /// Substitution rewards minus substitution penalties.
    pub subst_net: i32,
}

impl EditTally {
    pub fn score(&self, w: &EditWeights) -> f64 {
        self.insert_rewards as f64 * w.lambda_insert
            - self.delete_penalties as f64 * w.lambda_delete
            + self.subst_net as f64 * w.lambda_subst
    }

    pub fn add(&self, other: &EditTally) -> EditTally {
        EditTally {
            insert_rewards: self.insert_rewards + other.insert_rewards,
            delete_penalties: self.delete_penalties + other.delete_penalties,
            subst_net: self.subst_net + other.subst_net,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditEventKind {
    InsertionReward,
    DeletionPenalty,
    /// A sibling completes the deleted phrase while this node does not.
    DeletionAvoided,
    SubstitutionReward,
    SubstitutionPenalty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditEvent {
    pub constraint: usize,
    pub kind: EditEventKind,
}

#[derive(Clone, Debug)]
struct Slot {
    constraint: usize,
    role: PhraseRole,
    phrase: Option<Phrase<u32>>,
}

#[derive(Clone, Debug)]
struct Entry {
    kind: ConstraintKind,
    first_slot: usize,
    slot_count: usize,
}

/// Result of scoring one node against its sibling set.
#[derive(Clone, Debug, PartialEq)]
pub struct EditOutcome {
    pub tally: EditTally,
    pub delta: f64,
    pub state: SatisfactionState,
    pub events: Vec<EditEvent>,
}

/// A [`ConstraintSet`] compiled to match classes of a vocabulary. With case
/// folding on, all ids whose lowercase forms agree share a class.
#[derive(Clone, Debug)]
pub struct CompiledConstraints {
    entries: Vec<Entry>,
    slots: Vec<Slot>,
    class_of: Vec<u32>,
    members: HashMap<u32, Vec<TokenId>>,
    weights: EditWeights,
    unreachable: Vec<usize>,
}

impl CompiledConstraints {
    pub fn new(cs: &ConstraintSet, vocab: &Vocabulary, case_fold: bool) -> Self {
        let mut class_of = Vec::with_capacity(vocab.len());
        let mut by_form: HashMap<String, u32> = HashMap::new();
        for (id, tok) in vocab.tokens().iter().enumerate() {
            let form = if case_fold {
                tok.to_lowercase()
            } else {
                tok.clone()
            };
            let class = *by_form.entry(form).or_insert(id as u32);
            class_of.push(class);
        }
        let mut members: HashMap<u32, Vec<TokenId>> = HashMap::new();
        for (id, &c) in class_of.iter().enumerate() {
            members.entry(c).or_default().push(id as TokenId);
        }
        let lookup = |tok: &String| {
            let form = if case_fold {
                tok.to_lowercase()
            } else {
                tok.clone()
            };
            by_form.get(&form).copied()
        };
        let phrase_of = |p: &[String]| -> Option<Phrase<u32>> {
            let ids: Option<Vec<u32>> = p.iter().map(lookup).collect();
            ids.and_then(Phrase::new)
        };

        let mut entries = Vec::new();
        let mut slots = Vec::new();
        let mut unreachable = Vec::new();
        for (ci, c) in cs.constraints().iter().enumerate() {
            let first_slot = slots.len();
            let reachable = match c {
                Constraint::Insertion { phrase } | Constraint::Deletion { phrase } => {
                    let role = if c.kind() == ConstraintKind::Insertion {
                        PhraseRole::Insert
                    } else {
                        PhraseRole::Delete
                    };
                    let phrase = phrase_of(phrase);
                    let ok = phrase.is_some();
                    slots.push(Slot {
                        constraint: ci,
                        role,
                        phrase,
                    });
                    ok
                }
                Constraint::Substitution { from, to } => {
                    let from = phrase_of(from);
                    let from_ok = from.is_some();
                    slots.push(Slot {
                        constraint: ci,
                        role: PhraseRole::SubstFrom,
                        phrase: from,
                    });
                    let mut any_alt = false;
                    for (ai, alt) in to.iter().enumerate() {
                        let phrase = phrase_of(alt);
                        any_alt |= phrase.is_some();
                        slots.push(Slot {
                            constraint: ci,
                            role: PhraseRole::SubstTo(ai),
                            phrase,
                        });
                    }
                    from_ok && any_alt
                }
            };
            if !reachable {
                log::warn!("constraint {ci} ({c}) uses tokens outside the scorer vocabulary; it can never be satisfied");
                unreachable.push(ci);
            }
            entries.push(Entry {
                kind: c.kind(),
                first_slot,
                slot_count: slots.len() - first_slot,
            });
        }
        Self {
            entries,
            slots,
            class_of,
            members,
            weights: cs.weights,
            unreachable,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weights(&self) -> &EditWeights {
        &self.weights
    }

    /// Indices of constraints that reference out-of-vocabulary tokens.
    pub fn unreachable(&self) -> &[usize] {
        &self.unreachable
    }

    pub fn initial_state(&self) -> SatisfactionState {
        SatisfactionState::new(self.entries.len(), self.slots.len())
    }

    pub fn match_states(&self, state: &SatisfactionState) -> Vec<MatchState> {
        self.slots
            .iter()
            .enumerate()
            .map(|(i, s)| MatchState {
                constraint_index: s.constraint,
                phrase_role: s.role,
                matched_prefix_len: state.matched(i),
            })
            .collect()
    }

    fn class(&self, token: TokenId) -> u32 {
        self.class_of[token as usize]
    }

    /// Tokens whose selection would extend a pending insertion phrase or a
    /// pending substitution alternative. Deleted phrases and substitution
    /// sources are never proposed.
    pub fn reward_tokens(&self, state: &SatisfactionState) -> BTreeSet<TokenId> {
        let mut out = BTreeSet::new();
        for (si, slot) in self.slots.iter().enumerate() {
            let wanted = matches!(slot.role, PhraseRole::Insert | PhraseRole::SubstTo(_));
            let Some(phrase) = &slot.phrase else { continue };
            if !wanted || state.status(slot.constraint) != Status::Pending {
                continue;
            }
            let class = *phrase.next_expected(state.matched(si));
            out.extend(self.members[&class].iter().copied());
        }
        out
    }

    /// For each phrase slot, the positions in `siblings` that complete it
    /// from `parent`.
    pub fn completions(&self, parent: &SatisfactionState, siblings: &[TokenId]) -> Vec<Vec<usize>> {
        self.slots
            .iter()
            .enumerate()
            .map(|(si, slot)| match &slot.phrase {
                None => Vec::new(),
                Some(p) => siblings
                    .iter()
                    .enumerate()
                    .filter(|(_, &t)| p.completes(parent.matched(si), &self.class(t)))
                    .map(|(i, _)| i)
                    .collect(),
            })
            .collect()
    }

    /// Edit score of choosing `siblings[index]` given its sibling set, with
    /// precomputed `completions` for that set.
    pub fn score_node(
        &self,
        parent: &SatisfactionState,
        siblings: &[TokenId],
        index: usize,
        completions: &[Vec<usize>],
    ) -> EditOutcome {
        let token = siblings[index];
        let class = self.class(token);
        let mut state = parent.clone();
        let mut tally = EditTally::default();
        let mut events = Vec::new();
        let by_self = |slot: usize| completions[slot].contains(&index);
        let by_sibling = |slot: usize| completions[slot].iter().any(|&j| j != index);

        for (ci, e) in self.entries.iter().enumerate() {
            let status = parent.status(ci);
            let slots = e.first_slot..e.first_slot + e.slot_count;
            match e.kind {
                ConstraintKind::Insertion => {
                    if by_self(e.first_slot) && status == Status::Pending {
                        tally.insert_rewards += 1;
                        state.set_status(ci, Status::Satisfied);
                        events.push(EditEvent {
                            constraint: ci,
                            kind: EditEventKind::InsertionReward,
                        });
                    }
                }
                ConstraintKind::Deletion => {
                    if by_self(e.first_slot) {
                        tally.delete_penalties += 1;
                        state.add_violation(ci);
                        events.push(EditEvent {
                            constraint: ci,
                            kind: EditEventKind::DeletionPenalty,
                        });
                    } else if by_sibling(e.first_slot) {
                        if status == Status::Pending {
                            state.set_status(ci, Status::Satisfied);
                        }
                        events.push(EditEvent {
                            constraint: ci,
                            kind: EditEventKind::DeletionAvoided,
                        });
                    }
                }
                ConstraintKind::Substitution => {
                    let from = e.first_slot;
                    let alts = slots.start + 1..slots.end;
                    let self_out = alts.clone().any(by_self);
                    let sibling_out = alts.clone().any(by_sibling);
                    if self_out && by_sibling(from) && status == Status::Pending {
                        tally.subst_net += 1;
                        state.set_status(ci, Status::Satisfied);
                        events.push(EditEvent {
                            constraint: ci,
                            kind: EditEventKind::SubstitutionReward,
                        });
                    }
                    if by_self(from) && sibling_out {
                        tally.subst_net -= 1;
                        if status == Status::Pending {
                            state.set_status(ci, Status::Violated);
                        }
                        events.push(EditEvent {
                            constraint: ci,
                            kind: EditEventKind::SubstitutionPenalty,
                        });
                    }
                }
            }
        }
        for (si, slot) in self.slots.iter().enumerate() {
            if let Some(p) = &slot.phrase {
                state.set_matched(si, p.advance(parent.matched(si), &class));
            }
        }
        EditOutcome {
            tally,
            delta: tally.score(&self.weights),
            state,
            events,
        }
    }

    /// Edit score delta and successor state for choosing `token` out of the
    /// sibling set `siblings` (which must contain it).
    pub fn edit_delta(
        &self,
        token: TokenId,
        siblings: &[TokenId],
        parent: &SatisfactionState,
    ) -> EditOutcome {
        let index = siblings
            .iter()
            .position(|&t| t == token)
            .expect("token must be part of its sibling set");
        let completions = self.completions(parent, siblings);
        self.score_node(parent, siblings, index, &completions)
    }
}
