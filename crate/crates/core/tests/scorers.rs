mod common;

use std::sync::Arc;

use editdec::scorer::{
    train_ngram_lm, ConnectOptions, CopyBiasedScorer, ExternalScorer, RandomScorer, Scorer,
    ScorerServer, TokenId, UniformScorer, Vocabulary,
};
use editdec::synth::generate;
use editdec::tokens::TokenSeq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const QUERIES: usize = 1000;

fn corpus() -> Vec<TokenSeq> {
    generate(60, 2)
        .into_iter()
        .flat_map(|p| [p.complex, p.simple])
        .collect()
}

fn random_query(rng: &mut ChaCha8Rng, v: usize) -> (Vec<TokenId>, Vec<TokenId>) {
    let mut seq = |max: usize| -> Vec<TokenId> {
        let n = rng.gen_range(0..=max);
        (0..n).map(|_| rng.gen_range(0..v as TokenId)).collect()
    };
    let src = seq(12);
    let prefix = seq(8);
    (src, prefix)
}

fn assert_normalized<S: Scorer>(name: &str, scorer: &S, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = scorer.vocab().len();
    for q in 0..QUERIES {
        let (src, prefix) = random_query(&mut rng, v);
        let lp = scorer.score_next(&src, &prefix).unwrap();
        assert_eq!(lp.len(), v);
        let total: f64 = lp.iter().map(|x| x.exp()).sum();
        assert!((total - 1.0).abs() <= 1e-9, "{name} query {q}: sum {total}");
    }
}

#[test]
fn ngram_models_are_normalized() {
    let c = corpus();
    for order in 1..=4 {
        let lm = train_ngram_lm(&c, order, 0.1).unwrap();
        assert_normalized(&format!("order {order}"), &lm, order as u64);
    }
}

#[test]
fn copy_mixtures_are_normalized() {
    let lm = train_ngram_lm(&corpus(), 3, 0.1).unwrap();
    for (i, mu) in [0.0, 0.2, 0.4, 0.9, 1.0].into_iter().enumerate() {
        // mu = 1 leaves no mass outside the source; keep the source non-empty
        let copy = CopyBiasedScorer::new(&lm, mu).unwrap();
        assert_normalized(&format!("mu {mu}"), &copy, 10 + i as u64);
    }
}

#[test]
fn synthetic_scorers_are_normalized() {
    let vocab = Vocabulary::new(["a", "b", "c", "d", "e"]);
    assert_normalized("uniform", &UniformScorer::new(vocab.clone()), 20);
    for seed in 0..5 {
        assert_normalized(
            "random",
            &RandomScorer::new(vocab.clone(), seed, 3.0),
            21 + seed,
        );
    }
}

#[test]
fn scripted_scorer_is_normalized() {
    let s = common::walkthrough_scorer();
    let v = s.vocab();
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let prefixes = [
        vec![],
        vec!["craftsmen"],
        vec!["craftsmen", "are"],
        vec!["craftsmen", "are", "old"],
        vec!["are"],
        vec!["are", "old"],
        vec!["are", "old", "."],
        vec!["old", "aged"],
    ];
    for _ in 0..QUERIES {
        let p = &prefixes[rng.gen_range(0..prefixes.len())];
        let ids: Vec<TokenId> = p.iter().map(|t| v.id(t).unwrap()).collect();
        let lp = s.score_next(&[], &ids).unwrap();
        let total: f64 = lp.iter().map(|x| x.exp()).sum();
        assert!((total - 1.0).abs() <= 1e-9, "{p:?}: {total}");
    }
}

#[test]
fn external_scorer_is_normalized_and_exact() {
    let lm = train_ngram_lm(&corpus(), 3, 0.1).unwrap();
    let server = ScorerServer::bind("127.0.0.1:0", Arc::new(lm.clone())).unwrap();
    let remote = ExternalScorer::connect(server.local_addr(), ConnectOptions::default()).unwrap();
    assert_eq!(remote.vocab(), lm.vocab());
    assert_normalized("external", &remote, 40);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..200 {
        let (src, prefix) = random_query(&mut rng, lm.vocab().len());
        assert_eq!(
            remote.score_next(&src, &prefix).unwrap(),
            lm.score_next(&src, &prefix).unwrap()
        );
    }
}

#[test]
fn zero_copy_weight_is_the_base_model() {
    let lm = train_ngram_lm(&corpus(), 2, 0.1).unwrap();
    let copy = CopyBiasedScorer::new(&lm, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..QUERIES {
        let (src, prefix) = random_query(&mut rng, lm.vocab().len());
        assert_eq!(
            copy.score_next(&src, &prefix).unwrap(),
            lm.score_next(&src, &prefix).unwrap()
        );
    }
}
