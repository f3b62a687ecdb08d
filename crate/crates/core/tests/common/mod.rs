#![allow(dead_code)]

use editdec::constraint::{Constraint, ConstraintSet, EditWeights};
use editdec::decoder::DecoderConfig;
use editdec::scorer::{ScriptedScorer, Vocabulary};
use editdec::tokens::TokenSeq;

pub const WORDS: [&str; 7] = ["are", "craftsmen", "remain", "aged", "old", ".", "artisans"];

/// Scripted replay of the beam-3 walkthrough: the source mentions artisans
/// that remain aged; the reference reads "craftsmen are old .".
pub fn walkthrough_scorer() -> ScriptedScorer {
    let vocab = Vocabulary::new(WORDS);
    let mut s = ScriptedScorer::new(vocab);
    let scripted: Vec<(Vec<&str>, Vec<(&str, f64)>)> = vec![
        (
            vec![],
            vec![("are", 0.4), ("artisans", 0.3), ("craftsmen", 0.1)],
        ),
        (
            vec!["craftsmen"],
            vec![("are", 0.5), ("remain", 0.3), ("aged", 0.1)],
        ),
        (
            vec!["craftsmen", "are"],
            vec![("old", 0.5), ("aged", 0.3), (".", 0.1)],
        ),
        (vec!["craftsmen", "are", "old"], vec![(".", 0.8)]),
        (vec!["craftsmen", "are", "old", "."], vec![("</s>", 0.9)]),
        (
            vec!["are"],
            vec![("old", 0.5), ("remain", 0.2), ("craftsmen", 0.15)],
        ),
        (
            vec!["are", "old"],
            vec![(".", 0.8), ("</s>", 0.1), ("aged", 0.05)],
        ),
        (vec!["are", "old", "."], vec![("</s>", 0.95)]),
    ];
    // every other prefix mostly ends the sentence
    let mut stack: Vec<Vec<&str>> = vec![vec![]];
    while let Some(prefix) = stack.pop() {
        match scripted.iter().find(|(p, _)| *p == prefix) {
            Some((_, probs)) => s.step(&prefix, probs).unwrap(),
            None => s.step(&prefix, &[("</s>", 0.6)]).unwrap(),
        };
        if prefix.len() < 5 {
            for w in WORDS {
                let mut next = prefix.clone();
                next.push(w);
                stack.push(next);
            }
        }
    }
    s
}

pub fn walkthrough_constraints(weights: EditWeights) -> ConstraintSet {
    ConstraintSet::new(
        vec![
            Constraint::insertion("old").unwrap(),
            Constraint::deletion("remain").unwrap(),
            Constraint::deletion("aged").unwrap(),
            Constraint::substitution("artisans", ["craftsmen"]).unwrap(),
        ],
        weights,
    )
}

pub fn walkthrough_config() -> DecoderConfig {
    DecoderConfig {
        beam_size: 3,
        fanout: Some(3),
        delta: 1.0,
        max_len: 6,
        trace: true,
        ..DecoderConfig::default()
    }
}

pub fn walkthrough_source() -> TokenSeq {
    TokenSeq::from("the artisans remain aged .")
}

pub mod oracle {
    //! Exhaustive reference search with the edit rules written out directly
    //! over token suffixes.

    use editdec::constraint::{Constraint, ConstraintSet};
    use editdec::scorer::{Scorer, TokenId};

    #[derive(Clone, Copy, PartialEq, Debug)]
    enum St {
        Pending,
        Satisfied,
        Violated,
    }

    fn ends_with(prefix: &[&str], next: &str, phrase: &[String]) -> bool {
        let n = phrase.len();
        if n > prefix.len() + 1 || phrase[n - 1] != next {
            return false;
        }
        prefix[prefix.len() + 1 - n..]
            .iter()
            .zip(&phrase[..n - 1])
            .all(|(a, b)| *a == b)
    }

    /// Edit score of `output` when every step's sibling set is `siblings`.
    pub fn edit_score(cs: &ConstraintSet, output: &[&str], siblings: &[&str]) -> f64 {
        let (mut ni, mut nd, mut nr) = (0i32, 0i32, 0i32);
        let mut st = vec![St::Pending; cs.len()];
        for t in 0..output.len() {
            let prefix = &output[..t];
            let tok = output[t];
            let by_self = |p: &[String]| ends_with(prefix, tok, p);
            let by_sib = |p: &[String]| {
                siblings
                    .iter()
                    .any(|&k| k != tok && ends_with(prefix, k, p))
            };
            for (ci, c) in cs.constraints().iter().enumerate() {
                let before = st[ci];
                match c {
                    Constraint::Insertion { phrase } => {
                        if by_self(phrase) && before == St::Pending {
                            ni += 1;
                            st[ci] = St::Satisfied;
                        }
                    }
                    Constraint::Deletion { phrase } => {
                        if by_self(phrase) {
                            nd += 1;
                            st[ci] = St::Violated;
                        } else if by_sib(phrase) && before == St::Pending {
                            st[ci] = St::Satisfied;
                        }
                    }
                    Constraint::Substitution { from, to } => {
                        if to.iter().any(|a| by_self(a)) && by_sib(from) && before == St::Pending {
                            nr += 1;
                            st[ci] = St::Satisfied;
                        }
                        if by_self(from) && to.iter().any(|a| by_sib(a)) {
                            nr -= 1;
                            if before == St::Pending {
                                st[ci] = St::Violated;
                            }
                        }
                    }
                }
            }
        }
        let w = cs.weights;
        ni as f64 * w.lambda_insert - nd as f64 * w.lambda_delete + nr as f64 * w.lambda_subst
    }

    pub struct Best {
        pub tokens: Vec<TokenId>,
        pub edit: f64,
        pub normalized: f64,
    }

    /// Best finished sequence of at most `max_len` tokens (EOS included)
    /// under (edit score, normalized likelihood); also returns how many
    /// sequences share the best key.
    pub fn best_finished<S: Scorer>(
        scorer: &S,
        source: &[TokenId],
        cs: &ConstraintSet,
        max_len: usize,
        gamma: f64,
    ) -> (Best, usize) {
        let v = scorer.vocab();
        let generable: Vec<TokenId> = (0..v.len() as TokenId)
            .filter(|&t| v.is_generable(t))
            .collect();
        let names: Vec<&str> = generable.iter().map(|&t| v.token(t)).collect();
        let mut best: Option<Best> = None;
        let mut ties = 0;
        let mut stack: Vec<(Vec<TokenId>, f64)> = vec![(Vec::new(), 0.0)];
        while let Some((prefix, lp)) = stack.pop() {
            let next = scorer.score_next(source, &prefix).unwrap();
            for &t in &generable {
                let mut seq = prefix.clone();
                seq.push(t);
                let total = lp + next[t as usize];
                if t == v.eos() {
                    let words: Vec<&str> = seq.iter().map(|&x| v.token(x)).collect();
                    let edit = edit_score(cs, &words, &names);
                    let normalized = total / (seq.len() as f64).powf(gamma);
                    let cmp = best.as_ref().map(|b| {
                        edit.total_cmp(&b.edit)
                            .then(normalized.total_cmp(&b.normalized))
                    });
                    match cmp {
                        Some(std::cmp::Ordering::Less) => {}
                        Some(std::cmp::Ordering::Equal) => ties += 1,
                        _ => {
                            best = Some(Best {
                                tokens: seq,
                                edit,
                                normalized,
                            });
                            ties = 1;
                        }
                    }
                } else if seq.len() < max_len {
                    stack.push((seq, total));
                }
            }
        }
        (best.expect("EOS is always generable"), ties)
    }
}

pub mod instances {
    use editdec::constraint::{Constraint, ConstraintSet, EditWeights};
    use editdec::decoder::DecoderConfig;
    use editdec::scorer::{RandomScorer, Vocabulary};
    use editdec::tokens::TokenSeq;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub const WORDS: [&str; 5] = ["a", "b", "c", "d", "e"];

    pub struct Instance {
        pub scorer: RandomScorer,
        pub source: TokenSeq,
        pub constraints: ConstraintSet,
        pub max_len: usize,
    }

    fn phrase(rng: &mut ChaCha8Rng, words: &[&str]) -> String {
        let n = rng.gen_range(1..=2);
        (0..n)
            .map(|_| *words.choose(rng).unwrap())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Vocabulary of at most six entries (BOS, EOS and up to four words),
    /// random logits, and up to four random constraints.
    pub fn small(seed: u64) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_words = rng.gen_range(2..=4);
        let words = &WORDS[..n_words];
        let mut tokens = vec!["<s>".to_string(), "</s>".to_string()];
        tokens.extend(words.iter().map(|w| w.to_string()));
        let vocab = Vocabulary::from_parts(tokens, 0, 1).unwrap();
        let scorer = RandomScorer::new(vocab, rng.gen(), rng.gen_range(0.5..3.0));
        let mut constraints = Vec::new();
        for _ in 0..rng.gen_range(0..=4) {
            let c = match rng.gen_range(0..3) {
                0 => Constraint::insertion(phrase(&mut rng, words).as_str()),
                1 => Constraint::deletion(phrase(&mut rng, words).as_str()),
                _ => {
                    let from = phrase(&mut rng, words);
                    let alts: Vec<String> = (0..rng.gen_range(1..=2))
                        .map(|_| phrase(&mut rng, words))
                        .filter(|a| *a != from)
                        .collect();
                    if alts.is_empty() {
                        continue;
                    }
                    Constraint::substitution(from.as_str(), alts.iter().map(|a| a.as_str()))
                }
            };
            constraints.push(c.unwrap());
        }
        let weights = EditWeights::new(rng.gen(), rng.gen(), rng.gen());
        let source = TokenSeq::from_tokens(
            (0..rng.gen_range(0..4)).map(|_| *words.choose(&mut rng).unwrap()),
        );
        Instance {
            scorer,
            source,
            constraints: ConstraintSet::new(constraints, weights),
            max_len: rng.gen_range(1..=5),
        }
    }

    /// Beam wide enough to keep every prefix and no pruning at all.
    pub fn full_space(max_len: usize) -> DecoderConfig {
        DecoderConfig {
            beam_size: 4096,
            fanout: Some(64),
            alpha: Some(usize::MAX),
            delta: f64::INFINITY,
            max_len,
            ..DecoderConfig::default()
        }
    }

    /// Random scorer over a larger vocabulary, for reduction tests.
    pub fn toy_scorer(seed: u64) -> (RandomScorer, TokenSeq, DecoderConfig) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let n = rng.gen_range(3..=12);
        let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        let vocab = Vocabulary::new(&words);
        let scorer = RandomScorer::new(vocab, rng.gen(), rng.gen_range(0.5..4.0));
        let source = TokenSeq::from_tokens(
            (0..rng.gen_range(0..6)).map(|_| words.choose(&mut rng).unwrap().clone()),
        );
        let beam = rng.gen_range(1..=6);
        let cfg = DecoderConfig {
            beam_size: beam,
            fanout: rng.gen_bool(0.5).then(|| rng.gen_range(1..=6)),
            alpha: rng.gen_bool(0.3).then(|| rng.gen_range(1..=20)),
            max_len: rng.gen_range(1..=8),
            length_norm_gamma: [0.0, 0.5, 1.0][rng.gen_range(0..3)],
            ..DecoderConfig::default()
        };
        (scorer, source, cfg)
    }
}
