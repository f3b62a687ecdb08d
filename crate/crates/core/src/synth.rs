//! Rule-generated complex/simple sentence pairs with gold word alignments.
//!
//! Complex sentences draw from a fixed substitution dictionary and sprinkle
//! in filler adverbs; the simple side swaps every dictionary word for its
//! plain counterpart and drops the fillers.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::extract::Alignment;
use crate::tokens::TokenSeq;

/// `(complex, simple)` word pairs used by the generator.
pub const SUBSTITUTIONS: [(&str, &str); 24] = [
    ("physician", "doctor"),
    ("individuals", "people"),
    ("numerous", "many"),
    ("purchase", "buy"),
    ("obtain", "get"),
    ("construct", "build"),
    ("observe", "see"),
    ("modify", "change"),
    ("require", "need"),
    ("assist", "help"),
    ("vehicle", "car"),
    ("beverage", "drink"),
    ("residence", "home"),
    ("currently", "now"),
    ("subsequently", "later"),
    ("approximately", "about"),
    ("sufficient", "enough"),
    ("additional", "more"),
    ("enormous", "big"),
    ("minuscule", "small"),
    ("commence", "start"),
    ("terminate", "end"),
    ("reside", "live"),
    ("attempt", "try"),
];

pub const FILLERS: [&str; 4] = ["actually", "really", "basically", "certainly"];

// Each slot lists (complex form, simple form); equal forms are plain words.
const SUBJECTS: [(&str, &str); 6] = [
    ("the physician", "the doctor"),
    ("numerous individuals", "many people"),
    ("the children", "the children"),
    ("my neighbour", "my neighbour"),
    ("the physician", "the physician"),
    ("numerous students", "many students"),
];
const VERBS: [(&str, &str); 10] = [
    ("will purchase", "will buy"),
    ("must obtain", "must get"),
    ("will construct", "will build"),
    ("can observe", "can see"),
    ("will modify", "will change"),
    ("require", "need"),
    ("will attempt to find", "will try to find"),
    ("want", "want"),
    ("will commence painting", "will start painting"),
    ("like", "like"),
];
const ADJECTIVES: [(&str, &str); 5] = [
    ("enormous", "big"),
    ("minuscule", "small"),
    ("additional", "more"),
    ("red", "red"),
    ("sufficient", "enough"),
];
const OBJECTS: [(&str, &str); 6] = [
    ("vehicle", "car"),
    ("beverage", "drink"),
    ("residence", "home"),
    ("book", "book"),
    ("garden", "garden"),
    ("vehicle", "vehicle"),
];
const ENDINGS: [(&str, &str); 5] = [
    ("currently", "now"),
    ("subsequently", "later"),
    ("today", "today"),
    ("", ""),
    ("", ""),
];

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticPair {
    pub complex: TokenSeq,
    pub simple: TokenSeq,
    /// Links complex positions to simple positions.
    pub alignment: Alignment,
}

struct Builder {
    complex: Vec<String>,
    simple: Vec<String>,
    links: Vec<(usize, usize)>,
}

impl Builder {
    fn slot(&mut self, (c, s): (&str, &str)) {
        let cw: Vec<&str> = c.split_whitespace().collect();
        let sw: Vec<&str> = s.split_whitespace().collect();
        debug_assert_eq!(cw.len(), sw.len());
        for (a, b) in cw.into_iter().zip(sw) {
            self.links.push((self.complex.len(), self.simple.len()));
            self.complex.push(a.to_string());
            self.simple.push(b.to_string());
        }
    }

    fn filler(&mut self, word: &str) {
        self.complex.push(word.to_string());
    }
}

fn pair(rng: &mut ChaCha8Rng) -> SyntheticPair {
    let mut b = Builder {
        complex: Vec::new(),
        simple: Vec::new(),
        links: Vec::new(),
    };
    b.slot(*SUBJECTS.choose(rng).unwrap());
    if rng.gen_bool(0.4) {
        b.filler(FILLERS.choose(rng).unwrap());
    }
    b.slot(*VERBS.choose(rng).unwrap());
    b.slot(("a", "a"));
    if rng.gen_bool(0.5) {
        if rng.gen_bool(0.3) {
            b.filler("very");
        }
        b.slot(*ADJECTIVES.choose(rng).unwrap());
    }
    b.slot(*OBJECTS.choose(rng).unwrap());
    let ending = *ENDINGS.choose(rng).unwrap();
    if !ending.0.is_empty() {
        b.slot(ending);
    }
    b.slot((".", "."));
    SyntheticPair {
        complex: TokenSeq::from_tokens(b.complex),
        simple: TokenSeq::from_tokens(b.simple),
        alignment: Alignment::new(b.links),
    }
}

/// `n` pairs, deterministic in `seed`.
pub fn generate(n: usize, seed: u64) -> Vec<SyntheticPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| pair(&mut rng)).collect()
}

/// Translation-table rows (`src tgt prob`) for the substitution dictionary,
/// including self-translations and a few low-probability distractors.
pub fn translation_table_rows() -> String {
    let mut rows = String::new();
    for (c, s) in SUBSTITUTIONS {
        rows.push_str(&format!("{c} {s} 0.6\n{c} {c} 0.35\n{c} the 0.001\n"));
    }
    rows
}
