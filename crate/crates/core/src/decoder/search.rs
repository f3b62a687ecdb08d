use std::cmp::Ordering;
use std::collections::HashMap;

use super::compile::{CompiledConstraints, EditEvent, EditTally};
use super::trace::{GroupTrace, NodeRef, NodeTrace, SelectedTrace, SiblingSetTrace, TraceStep};
use super::{DecodeError, DecodeResult, DecoderConfig, Hypothesis};
use crate::constraint::ConstraintSet;
use crate::scorer::{Scorer, TokenId};
use crate::state::{GroupKey, SatisfactionState};
use crate::tokens::TokenSeq;

/// One proposed continuation of a beam hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateNode {
    /// Index of the parent in the current beam.
    pub parent: usize,
    /// Nodes expanded from the same parent share this id.
    pub sibling_set_id: usize,
    pub token: TokenId,
    pub injected: bool,
    pub incr_logprob: f64,
    /// Cumulative log-likelihood including this token.
    pub logprob: f64,
    /// Output length including this token.
    pub len: usize,
    pub normalized: f64,
    pub tally: EditTally,
    pub edit_delta: f64,
    /// Cumulative edit score including this node.
    pub edit_score: f64,
    pub new_sat: SatisfactionState,
    pub events: Vec<EditEvent>,
}

fn likelihood_order(a: &CandidateNode, b: &CandidateNode) -> Ordering {
    b.normalized
        .total_cmp(&a.normalized)
        .then(a.sibling_set_id.cmp(&b.sibling_set_id))
        .then(a.token.cmp(&b.token))
}

fn edit_then_likelihood(a: &CandidateNode, b: &CandidateNode) -> Ordering {
    b.edit_score
        .total_cmp(&a.edit_score)
        .then_with(|| likelihood_order(a, b))
}

struct Pruned {
    kept: Vec<CandidateNode>,
    alpha_pruned: Vec<CandidateNode>,
    delta_pruned: Vec<CandidateNode>,
    threshold: f64,
}

fn prune_detailed(mut pool: Vec<CandidateNode>, cfg: &DecoderConfig) -> Pruned {
    pool.sort_by(likelihood_order);
    let alpha_pruned = pool.split_off(cfg.alpha().min(pool.len()));
    let best = pool
        .iter()
        .map(|n| n.edit_score)
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = best - cfg.delta;
    let (kept, delta_pruned): (Vec<_>, Vec<_>) =
        pool.into_iter().partition(|n| n.edit_score >= threshold);
    Pruned {
        kept,
        alpha_pruned,
        delta_pruned,
        threshold,
    }
}

/// Keeps the top-alpha candidates by normalized likelihood, then drops those
/// whose edit score is more than `delta` below the best remaining one.
pub fn prune(pool: Vec<CandidateNode>, cfg: &DecoderConfig) -> Vec<CandidateNode> {
    prune_detailed(pool, cfg).kept
}

fn group_detailed(
    pool: Vec<CandidateNode>,
    cfg: &DecoderConfig,
) -> (
    Vec<CandidateNode>,
    Vec<GroupTrace>,
    Vec<(GroupKey, Vec<CandidateNode>)>,
) {
    let mut index: HashMap<GroupKey, usize> = HashMap::new();
    let mut groups: Vec<(GroupKey, Vec<CandidateNode>)> = Vec::new();
    for node in pool {
        let key = node.new_sat.group_key();
        let gi = *index.entry(key.clone()).or_insert_with(|| {
            groups.push((key, Vec::new()));
            groups.len() - 1
        });
        groups[gi].1.push(node);
    }
    for (_, members) in &mut groups {
        members.sort_by(edit_then_likelihood);
    }
    let best_likelihood = |g: &(GroupKey, Vec<CandidateNode>)| {
        g.1.iter()
            .map(|n| n.normalized)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    // stable: equal groups keep first-appearance order
    groups.sort_by(|a, b| {
        b.0.satisfied_count()
            .cmp(&a.0.satisfied_count())
            .then_with(|| best_likelihood(b).total_cmp(&best_likelihood(a)))
    });
    let traces = groups
        .iter()
        .map(|(key, members)| GroupTrace {
            key: key.clone(),
            satisfied: key.satisfied_count(),
            members: members.iter().map(node_ref_fn).collect(),
        })
        .collect();

    let mut cursors = vec![0usize; groups.len()];
    let mut selected = Vec::with_capacity(cfg.beam_size);
    let total: usize = groups.iter().map(|g| g.1.len()).sum();
    while selected.len() < cfg.beam_size && selected.len() < total {
        for (gi, (_, members)) in groups.iter().enumerate() {
            if selected.len() == cfg.beam_size {
                break;
            }
            if let Some(node) = members.get(cursors[gi]) {
                selected.push(node.clone());
                cursors[gi] += 1;
            }
        }
    }
    (selected, traces, groups)
}

fn node_ref_fn(n: &CandidateNode) -> NodeRef {
    NodeRef {
        set: n.sibling_set_id,
        // token strings are filled in by the caller that owns the vocabulary
        token: n.token.to_string(),
    }
}

/// Groups candidates by constraint status vector and fills the beam
/// round-robin: groups with more satisfied constraints (then higher best
/// likelihood) go first; within a group, higher edit score then likelihood.
pub fn group_and_select(pool: Vec<CandidateNode>, cfg: &DecoderConfig) -> Vec<CandidateNode> {
    group_detailed(pool, cfg).0
}

/// A prepared decoding problem: scorer, encoded source, compiled constraints
/// and a validated configuration.
pub struct ConstrainedSearch<'a, S: Scorer + ?Sized> {
    scorer: &'a S,
    source: Vec<TokenId>,
    compiled: CompiledConstraints,
    cfg: DecoderConfig,
}

impl<'a, S: Scorer + ?Sized> ConstrainedSearch<'a, S> {
    pub fn new(
        source: &TokenSeq,
        scorer: &'a S,
        cs: &ConstraintSet,
        cfg: &DecoderConfig,
    ) -> Result<Self, DecodeError> {
        cfg.validate()?;
        let vocab = scorer.vocab();
        if vocab.is_empty() {
            return Err(DecodeError::EmptyVocabulary);
        }
        Ok(Self {
            scorer,
            source: vocab.encode(source),
            compiled: CompiledConstraints::new(cs, vocab, cfg.case_fold),
            cfg: cfg.clone(),
        })
    }

    pub fn compiled(&self) -> &CompiledConstraints {
        &self.compiled
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn root(&self) -> Hypothesis {
        Hypothesis::root(self.compiled.initial_state())
    }

    /// Builds the sibling set of `h`: the top-`fanout` tokens by likelihood,
    /// plus any token that advances a pending insertion or substitution
    /// output, each scored against the whole set.
    pub fn expand(&self, h: &Hypothesis, parent: usize) -> Result<Vec<CandidateNode>, DecodeError> {
        let vocab = self.scorer.vocab();
        let logprobs = self.scorer.score_next(&self.source, &h.tokens)?;
        let mut natural: Vec<TokenId> = (0..vocab.len() as TokenId)
            .filter(|&t| vocab.is_generable(t))
            .collect();
        natural.sort_by(|&a, &b| {
            logprobs[b as usize]
                .total_cmp(&logprobs[a as usize])
                .then(a.cmp(&b))
        });
        natural.truncate(self.cfg.fanout());
        let n_natural = natural.len();
        let mut siblings = natural;
        for t in self.compiled.reward_tokens(&h.sat) {
            if vocab.is_generable(t) && !siblings.contains(&t) {
                siblings.push(t);
            }
        }

        let completions = self.compiled.completions(&h.sat, &siblings);
        let len = h.len() + 1;
        Ok(siblings
            .iter()
            .enumerate()
            .map(|(i, &token)| {
                let outcome = self.compiled.score_node(&h.sat, &siblings, i, &completions);
                let incr = logprobs[token as usize];
                let logprob = h.logprob + incr;
                let tally = h.tally.add(&outcome.tally);
                CandidateNode {
                    parent,
                    sibling_set_id: parent,
                    token,
                    injected: i >= n_natural,
                    incr_logprob: incr,
                    logprob,
                    len,
                    normalized: self.cfg.normalize(logprob, len),
                    tally,
                    edit_delta: outcome.delta,
                    edit_score: tally.score(self.compiled.weights()),
                    new_sat: outcome.state,
                    events: outcome.events,
                }
            })
            .collect())
    }

    fn child(&self, parent: &Hypothesis, node: &CandidateNode) -> Hypothesis {
        let mut tokens = parent.tokens.clone();
        tokens.push(node.token);
        let mut deltas = parent.deltas.clone();
        deltas.push(node.edit_delta);
        Hypothesis {
            tokens,
            logprob: node.logprob,
            tally: node.tally,
            edit_score: node.edit_score,
            deltas,
            sat: node.new_sat.clone(),
            finished: node.token == self.scorer.vocab().eos(),
        }
    }

    fn final_key(&self, a: &Hypothesis, b: &Hypothesis) -> Ordering {
        a.edit_score
            .total_cmp(&b.edit_score)
            .then_with(|| a.normalized(&self.cfg).total_cmp(&b.normalized(&self.cfg)))
    }

    fn best_of<'h>(&self, pool: &'h [Hypothesis]) -> Option<&'h Hypothesis> {
        pool.iter()
            .fold(None, |best: Option<&Hypothesis>, h| match best {
                Some(b) if self.final_key(h, b) != Ordering::Greater => Some(b),
                _ => Some(h),
            })
    }

    pub fn run(&self) -> Result<DecodeResult, DecodeError> {
        let vocab = self.scorer.vocab();
        let name = |t: TokenId| vocab.token(t).to_string();
        let named = |r: NodeRef| NodeRef {
            set: r.set,
            token: name(r.token.parse().expect("numeric node ref")),
        };
        let mut beam = vec![self.root()];
        let mut finished = Vec::new();
        let mut trace = self.cfg.trace.then(Vec::new);

        for step in 0..self.cfg.max_len {
            let mut pool = Vec::new();
            let mut sets = Vec::new();
            for (i, h) in beam.iter().enumerate() {
                let nodes = self.expand(h, i)?;
                if trace.is_some() {
                    sets.push(SiblingSetTrace {
                        id: i,
                        parent: vocab.decode(&h.tokens).into_inner(),
                        parent_edit_score: h.edit_score,
                        nodes: nodes
                            .iter()
                            .map(|n| NodeTrace {
                                token: name(n.token),
                                injected: n.injected,
                                incr_logprob: n.incr_logprob,
                                logprob: n.logprob,
                                normalized: n.normalized,
                                edit_delta: n.edit_delta,
                                edit_score: n.edit_score,
                                events: n.events.clone(),
                            })
                            .collect(),
                    });
                }
                pool.extend(nodes);
            }
            if pool.is_empty() {
                break;
            }
            let pruned = prune_detailed(pool, &self.cfg);
            let (selected, groups, _) = group_detailed(pruned.kept, &self.cfg);

            let mut next = Vec::with_capacity(selected.len());
            let mut chosen = Vec::with_capacity(selected.len());
            for node in &selected {
                let h = self.child(&beam[node.parent], node);
                if trace.is_some() {
                    chosen.push(SelectedTrace {
                        beam: chosen.len(),
                        set: node.sibling_set_id,
                        token: name(node.token),
                        output: vocab.decode(&h.tokens).into_inner(),
                        edit_score: h.edit_score,
                        normalized: h.normalized(&self.cfg),
                        finished: h.finished,
                    });
                }
                if h.finished {
                    finished.push(h);
                } else {
                    next.push(h);
                }
            }
            if let Some(trace) = trace.as_mut() {
                let refs = |v: &[CandidateNode]| v.iter().map(|n| named(node_ref_fn(n))).collect();
                trace.push(TraceStep {
                    timestep: step + 2,
                    sibling_sets: sets,
                    alpha_pruned: refs(&pruned.alpha_pruned),
                    delta_threshold: pruned.threshold.is_finite().then_some(pruned.threshold),
                    delta_pruned: refs(&pruned.delta_pruned),
                    groups: groups
                        .into_iter()
                        .map(|g| GroupTrace {
                            members: g.members.into_iter().map(named).collect(),
                            ..g
                        })
                        .collect(),
                    selected: chosen,
                });
            }
            beam = next;
            if beam.is_empty() {
                break;
            }
        }

        let (best, truncated) = match self.best_of(&finished) {
            Some(b) => (b.clone(), false),
            None => (
                self.best_of(&beam).cloned().unwrap_or_else(|| self.root()),
                true,
            ),
        };
        Ok(DecodeResult {
            output: best.output(vocab),
            best,
            finished_pool: finished,
            truncated,
            unreachable: self.compiled.unreachable().to_vec(),
            trace,
        })
    }
}

/// Decodes `source` under the edit constraints in `cs`. The winner is the
/// finished hypothesis with the highest edit score, ties broken by
/// length-normalized likelihood.
pub fn decode<S: Scorer + ?Sized>(
    source: &TokenSeq,
    scorer: &S,
    cs: &ConstraintSet,
    cfg: &DecoderConfig,
) -> Result<DecodeResult, DecodeError> {
    ConstrainedSearch::new(source, scorer, cs, cfg)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{Constraint, EditWeights};
    use crate::decoder::EditEventKind;
    use crate::scorer::{ScriptedScorer, Vocabulary};
    use crate::state::Status;
    use proptest::prelude::*;

    fn node(
        set: usize,
        token: TokenId,
        normalized: f64,
        edit: f64,
        statuses: &[Status],
    ) -> CandidateNode {
        let mut sat = SatisfactionState::new(statuses.len(), 0);
        for (i, &s) in statuses.iter().enumerate() {
            sat.set_status(i, s);
        }
        CandidateNode {
            parent: set,
            sibling_set_id: set,
            token,
            injected: false,
            incr_logprob: normalized,
            logprob: normalized,
            len: 1,
            normalized,
            tally: EditTally::default(),
            edit_delta: edit,
            edit_score: edit,
            new_sat: sat,
            events: Vec::new(),
        }
    }

    fn cfg(beam: usize) -> DecoderConfig {
        DecoderConfig {
            beam_size: beam,
            ..DecoderConfig::default()
        }
    }

    fn scorer(first: &[(&str, f64)]) -> ScriptedScorer {
        let vocab = Vocabulary::new(["artisans", "craftsmen", "are", "remain", "old", "."]);
        let mut s = ScriptedScorer::new(vocab);
        s.step(&[], first).unwrap();
        s
    }

    fn set(cs: Vec<Constraint>, w: EditWeights) -> ConstraintSet {
        ConstraintSet::new(cs, w)
    }

    fn tok(s: &ScriptedScorer, n: &CandidateNode) -> String {
        s.vocab().token(n.token).to_string()
    }

    #[test]
    fn insertion_token_is_injected() {
        let s = scorer(&[("are", 0.4), ("artisans", 0.3), ("craftsmen", 0.2)]);
        let cs = set(
            vec![Constraint::insertion("old").unwrap()],
            EditWeights::new(0.5, 0.5, 0.5),
        );
        let c = DecoderConfig {
            fanout: Some(3),
            ..cfg(3)
        };
        let search = ConstrainedSearch::new(&TokenSeq::new(), &s, &cs, &c).unwrap();
        let nodes = search.expand(&search.root(), 0).unwrap();
        assert_eq!(nodes.len(), 4);
        let old = nodes.iter().find(|n| tok(&s, n) == "old").unwrap();
        assert!(old.injected);
        assert_eq!(old.edit_delta, 0.5);
        assert!(nodes
            .iter()
            .filter(|n| tok(&s, n) != "old")
            .all(|n| !n.injected && n.edit_delta == 0.0));
    }

    #[test]
    fn deletion_and_source_tokens_are_not_injected() {
        let s = scorer(&[("are", 0.4), ("old", 0.3), (".", 0.2)]);
        let cs = set(
            vec![
                Constraint::deletion("remain").unwrap(),
                Constraint::substitution("artisans", ["craftsmen"]).unwrap(),
            ],
            EditWeights::new(0.5, 0.5, 0.5),
        );
        let c = DecoderConfig {
            fanout: Some(3),
            ..cfg(3)
        };
        let search = ConstrainedSearch::new(&TokenSeq::new(), &s, &cs, &c).unwrap();
        let names: Vec<String> = search
            .expand(&search.root(), 0)
            .unwrap()
            .iter()
            .map(|n| tok(&s, n))
            .collect();
        assert_eq!(names, ["are", "old", ".", "craftsmen"]);
    }

    #[test]
    fn substitution_needs_the_source_among_siblings() {
        let cs = set(
            vec![Constraint::substitution("artisans", ["craftsmen"]).unwrap()],
            EditWeights::new(0.5, 0.5, 0.23),
        );
        let c = DecoderConfig {
            fanout: Some(3),
            ..cfg(3)
        };

        let paired = scorer(&[("artisans", 0.4), ("are", 0.3), ("craftsmen", 0.2)]);
        let search = ConstrainedSearch::new(&TokenSeq::new(), &paired, &cs, &c).unwrap();
        let nodes = search.expand(&search.root(), 0).unwrap();
        let delta = |name: &str| {
            nodes
                .iter()
                .find(|n| tok(&paired, n) == name)
                .unwrap()
                .clone()
        };
        assert_eq!(delta("craftsmen").edit_delta, 0.23);
        assert_eq!(delta("craftsmen").new_sat.status(0), Status::Satisfied);
        assert_eq!(delta("artisans").edit_delta, -0.23);
        assert_eq!(delta("artisans").new_sat.status(0), Status::Violated);
        assert_eq!(delta("are").edit_delta, 0.0);
        assert_eq!(delta("are").new_sat.status(0), Status::Pending);

        let unpaired = scorer(&[("are", 0.4), ("craftsmen", 0.3), ("old", 0.2)]);
        let search = ConstrainedSearch::new(&TokenSeq::new(), &unpaired, &cs, &c).unwrap();
        for n in search.expand(&search.root(), 0).unwrap() {
            assert_eq!(n.edit_delta, 0.0);
            assert!(n.events.is_empty());
            assert_eq!(n.new_sat.status(0), Status::Pending);
        }
    }

    #[test]
    fn or_alternatives_each_satisfy() {
        let vocab = Vocabulary::new(["garrison", "defend", "protect", "the"]);
        let cs = set(
            vec![Constraint::substitution("garrison", ["defend", "protect"]).unwrap()],
            EditWeights::new(0.0, 0.0, 0.4),
        );
        let compiled = CompiledConstraints::new(&cs, &vocab, false);
        let ids = |ws: &[&str]| ws.iter().map(|w| vocab.id(w).unwrap()).collect::<Vec<_>>();
        let siblings = ids(&["garrison", "defend", "protect"]);
        let root = compiled.initial_state();
        for alt in ["defend", "protect"] {
            let out = compiled.edit_delta(vocab.id(alt).unwrap(), &siblings, &root);
            assert_eq!(out.delta, 0.4);
            assert_eq!(out.state.status(0), Status::Satisfied);
        }
        let out = compiled.edit_delta(vocab.id("garrison").unwrap(), &siblings, &root);
        // one penalty even though two alternatives are present
        assert_eq!(out.delta, -0.4);
    }

    #[test]
    fn deltas_from_distinct_constraints_sum() {
        let vocab = Vocabulary::new(["old", "are"]);
        let w = EditWeights::new(0.3, 0.7, 0.0);
        let siblings: Vec<TokenId> = vec![vocab.id("old").unwrap(), vocab.id("are").unwrap()];
        let single = |c: Constraint| {
            let compiled = CompiledConstraints::new(&set(vec![c], w), &vocab, false);
            compiled
                .edit_delta(siblings[0], &siblings, &compiled.initial_state())
                .delta
        };
        let ins = single(Constraint::insertion("old").unwrap());
        let del = single(Constraint::deletion("old").unwrap());
        let both = CompiledConstraints::new(
            &set(
                vec![
                    Constraint::insertion("old").unwrap(),
                    Constraint::deletion("old").unwrap(),
                ],
                w,
            ),
            &vocab,
            false,
        );
        let out = both.edit_delta(siblings[0], &siblings, &both.initial_state());
        assert_eq!(out.delta, ins + del);
        assert!((out.delta - (0.3 - 0.7)).abs() < 1e-15);
        let kinds: Vec<_> = out.events.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            [
                EditEventKind::InsertionReward,
                EditEventKind::DeletionPenalty
            ]
        );
    }

    #[test]
    fn deletion_avoided_by_sibling() {
        let vocab = Vocabulary::new(["remain", "are"]);
        let cs = set(
            vec![Constraint::deletion("remain").unwrap()],
            EditWeights::default(),
        );
        let compiled = CompiledConstraints::new(&cs, &vocab, false);
        let remain = vocab.id("remain").unwrap();
        let are = vocab.id("are").unwrap();
        let root = compiled.initial_state();
        let chose_other = compiled.edit_delta(are, &[remain, are], &root);
        assert_eq!(chose_other.delta, 0.0);
        assert_eq!(chose_other.state.status(0), Status::Satisfied);
        let alone = compiled.edit_delta(are, &[are], &root);
        assert_eq!(alone.state.status(0), Status::Pending);
        let chose_it = compiled.edit_delta(remain, &[remain, are], &chose_other.state);
        assert_eq!(chose_it.delta, -0.66);
        assert_eq!(chose_it.state.status(0), Status::Violated);
        let again = compiled.edit_delta(remain, &[remain, are], &chose_it.state);
        assert_eq!(again.state.violations(0), 2);
        // violation is absorbing even when later avoided
        let later = compiled.edit_delta(are, &[remain, are], &again.state);
        assert_eq!(later.state.status(0), Status::Violated);
    }

    #[test]
    fn case_fold_matches_capitalized_tokens() {
        let vocab = Vocabulary::new(["old", "Old"]);
        let cs = set(
            vec![Constraint::insertion("old").unwrap()],
            EditWeights::new(0.5, 0.0, 0.0),
        );
        let upper = vocab.id("Old").unwrap();
        let strict = CompiledConstraints::new(&cs, &vocab, false);
        assert_eq!(
            strict
                .edit_delta(upper, &[upper], &strict.initial_state())
                .delta,
            0.0
        );
        let folded = CompiledConstraints::new(&cs, &vocab, true);
        assert_eq!(
            folded
                .edit_delta(upper, &[upper], &folded.initial_state())
                .delta,
            0.5
        );
    }

    #[test]
    fn delta_gap_drops_trailing_nodes() {
        let p = Status::Pending;
        let c = DecoderConfig {
            delta: 0.12,
            ..cfg(2)
        };
        let kept = prune(
            vec![node(0, 3, -1.0, 0.5, &[p]), node(0, 4, -0.5, 0.0, &[p])],
            &c,
        );
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].token, 3);

        let slack = DecoderConfig {
            delta: 2.0,
            ..c.clone()
        };
        assert_eq!(
            prune(
                vec![node(0, 3, -1.0, 0.5, &[p]), node(0, 4, -0.5, 0.0, &[p])],
                &slack
            )
            .len(),
            2
        );
    }

    #[test]
    fn ties_leave_only_alpha_pruning() {
        let c = DecoderConfig {
            alpha: Some(2),
            ..cfg(4)
        };
        let pool = vec![
            node(0, 3, -3.0, 0.2, &[]),
            node(0, 4, -1.0, 0.2, &[]),
            node(1, 3, -2.0, 0.2, &[]),
        ];
        let kept: Vec<_> = prune(pool, &c)
            .iter()
            .map(|n| (n.sibling_set_id, n.token))
            .collect();
        assert_eq!(kept, [(0, 4), (1, 3)]);
    }

    #[test]
    fn round_robin_across_groups() {
        use Status::*;
        let pool = vec![
            node(0, 3, -1.0, 0.0, &[Pending]),
            node(0, 4, -2.0, 0.0, &[Satisfied]),
            node(0, 5, -3.0, 0.0, &[Pending]),
            node(0, 6, -4.0, 0.0, &[Satisfied]),
        ];
        let picked: Vec<_> = group_and_select(pool, &cfg(3))
            .iter()
            .map(|n| n.token)
            .collect();
        assert_eq!(picked, [4, 3, 6]);
    }

    #[test]
    fn single_group_is_edit_then_likelihood() {
        let pool = vec![
            node(0, 3, -1.0, 0.0, &[]),
            node(0, 4, -2.0, 0.5, &[]),
            node(0, 5, -0.5, 0.0, &[]),
        ];
        let picked: Vec<_> = group_and_select(pool, &cfg(2))
            .iter()
            .map(|n| n.token)
            .collect();
        assert_eq!(picked, [4, 5]);
    }

    /// Independent formulation: member rank within its group first, group
    /// order second.
    fn selection_oracle(pool: &[CandidateNode], beam: usize) -> Vec<(usize, TokenId)> {
        let mut keys: Vec<GroupKey> = Vec::new();
        for n in pool {
            if !keys.contains(&n.new_sat.group_key()) {
                keys.push(n.new_sat.group_key());
            }
        }
        let members = |k: &GroupKey| {
            let mut m: Vec<&CandidateNode> = pool
                .iter()
                .filter(|n| &n.new_sat.group_key() == k)
                .collect();
            m.sort_by(|a, b| {
                (b.edit_score, b.normalized)
                    .partial_cmp(&(a.edit_score, a.normalized))
                    .unwrap()
                    .then((a.sibling_set_id, a.token).cmp(&(b.sibling_set_id, b.token)))
            });
            m
        };
        let best = |k: &GroupKey| {
            members(k)[0..]
                .iter()
                .map(|n| n.normalized)
                .fold(f64::MIN, f64::max)
        };
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by(|&a, &b| {
            (keys[b].satisfied_count(), best(&keys[b]))
                .partial_cmp(&(keys[a].satisfied_count(), best(&keys[a])))
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut ranked = Vec::new();
        for (g, &ki) in order.iter().enumerate() {
            for (r, n) in members(&keys[ki]).into_iter().enumerate() {
                ranked.push((r, g, n.sibling_set_id, n.token));
            }
        }
        ranked.sort();
        ranked
            .into_iter()
            .take(beam)
            .map(|(_, _, s, t)| (s, t))
            .collect()
    }

    proptest! {
        #[test]
        fn selection_matches_oracle(
            raw in proptest::collection::vec((0usize..3, 0u32..4, 0i32..4, 0i32..3, proptest::collection::vec(0u8..3, 2)), 1..14),
            beam in 1usize..8,
        ) {
            let mut seen = std::collections::HashSet::new();
            let pool: Vec<CandidateNode> = raw
                .into_iter()
                .filter(|(s, t, ..)| seen.insert((*s, *t)))
                .map(|(s, t, lp, e, st)| {
                    let statuses: Vec<Status> = st
                        .iter()
                        .map(|v| [Status::Pending, Status::Satisfied, Status::Violated][*v as usize])
                        .collect();
                    node(s, t, -(lp as f64) * 0.5, e as f64 * 0.25, &statuses)
                })
                .collect();
            let expected = selection_oracle(&pool, beam);
            let got: Vec<_> = group_and_select(pool, &cfg(beam)).iter().map(|n| (n.sibling_set_id, n.token)).collect();
            prop_assert_eq!(got, expected);
        }
    }
}
