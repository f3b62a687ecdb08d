use std::collections::BTreeMap;

use super::ExtractError;
use crate::constraint::{Constraint, ConstraintSet, EditWeights};
use crate::tokens::TokenSeq;

pub const DEFAULT_MIN_PROB: f64 = 0.002;

/// Lexical translation probabilities, per source token sorted by
/// probability (descending, ties by target).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TranslationTable {
    entries: BTreeMap<String, Vec<(String, f64)>>,
}

impl TranslationTable {
    pub fn get(&self, token: &str) -> &[(String, f64)] {
        self.entries.get(token).map_or(&[], |v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[(String, f64)])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// Reads `src tgt prob` rows, dropping probabilities below `min_prob` and
/// keeping the largest probability for repeated pairs.
pub fn load_translation_table(text: &str, min_prob: f64) -> Result<TranslationTable, ExtractError> {
    let mut best: BTreeMap<(String, String), f64> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let err = |message: String| ExtractError::Table {
            line: n + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [src, tgt, prob] = fields[..] else {
            return Err(err(format!("expected 3 fields, found {}", fields.len())));
        };
        let p: f64 = prob
            .parse()
            .map_err(|_| err(format!("non-numeric probability {prob:?}")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(err(format!("probability {p} outside [0, 1]")));
        }
        let slot = best.entry((src.to_string(), tgt.to_string())).or_insert(p);
        *slot = slot.max(p);
    }
    let mut entries: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for ((src, tgt), p) in best {
        if p >= min_prob {
            entries.entry(src).or_default().push((tgt, p));
        }
    }
    for list in entries.values_mut() {
        list.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    }
    Ok(TranslationTable { entries })
}

/// Substitution from `token` to every listed translation other than itself.
pub fn substitution_candidates(token: &str, table: &TranslationTable) -> Option<Constraint> {
    let targets: Vec<TokenSeq> = table
        .get(token)
        .iter()
        .filter(|(t, _)| t != token)
        .map(|(t, _)| TokenSeq::from_tokens([t]))
        .collect();
    if targets.is_empty() {
        return None;
    }
    Constraint::substitution(TokenSeq::from_tokens([token]), targets).ok()
}

/// Substitution candidates for every distinct token of `src` marked by
/// `replace` (all tokens when `None`).
pub fn table_constraints(
    src: &TokenSeq,
    replace: Option<&[bool]>,
    table: &TranslationTable,
    weights: EditWeights,
) -> ConstraintSet {
    let mut out: Vec<Constraint> = Vec::new();
    for (i, tok) in src.iter().enumerate() {
        if replace.is_some_and(|mask| !mask.get(i).copied().unwrap_or(false)) {
            continue;
        }
        if let Some(c) = substitution_candidates(tok, table) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    ConstraintSet::new(out, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_and_order() {
        let t = load_translation_table(
            "garrison defend 0.4\ngarrison zzz 0.001\ngarrison garrison 0.5\ngarrison guard 0.4\n",
            DEFAULT_MIN_PROB,
        )
        .unwrap();
        let names: Vec<&str> = t.get("garrison").iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(names, ["garrison", "defend", "guard"]);
        assert!(t
            .get("garrison")
            .iter()
            .all(|(_, p)| *p >= DEFAULT_MIN_PROB));
        assert_eq!(t.get("castle"), &[]);
    }

    #[test]
    fn threshold_is_inclusive() {
        let t = load_translation_table("a b 0.002\na c 0.0019999", DEFAULT_MIN_PROB).unwrap();
        assert_eq!(t.get("a").len(), 1);
    }

    #[test]
    fn empty_input() {
        assert!(load_translation_table("", DEFAULT_MIN_PROB)
            .unwrap()
            .is_empty());
        assert!(load_translation_table("\n\n", DEFAULT_MIN_PROB)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn duplicates_keep_max() {
        let rows = "a b 0.1\na c 0.3\na b 0.5\na b 0.2\n";
        let t = load_translation_table(rows, DEFAULT_MIN_PROB).unwrap();
        // reference: fold rows by pair, then compare the whole table
        let mut expected: BTreeMap<(String, String), f64> = BTreeMap::new();
        for line in rows.lines() {
            let f: Vec<&str> = line.split(' ').collect();
            let e = expected.entry((f[0].into(), f[1].into())).or_insert(0.0);
            *e = e.max(f[2].parse().unwrap());
        }
        let got: BTreeMap<(String, String), f64> = t
            .iter()
            .flat_map(|(s, l)| {
                l.iter()
                    .map(move |(tg, p)| ((s.to_string(), tg.clone()), *p))
            })
            .collect();
        assert_eq!(got, expected);
        assert_eq!(t.get("a")[0], ("b".to_string(), 0.5));
    }

    #[test]
    fn bad_rows() {
        for (rows, line) in [
            ("a b x", 1),
            ("a b 0.1\na b 1.5", 2),
            ("a b", 1),
            ("a b -0.1", 1),
            ("a b 0.1 0.2", 1),
        ] {
            match load_translation_table(rows, DEFAULT_MIN_PROB) {
                Err(ExtractError::Table { line: l, .. }) => assert_eq!(l, line, "{rows}"),
                other => panic!("{rows}: {other:?}"),
            }
        }
    }

    #[test]
    fn candidates_exclude_self() {
        let t = load_translation_table(
            "garrison defend 0.4\ngarrison garrison 0.5\ninstrument device 0.6\nsame same 0.9",
            0.002,
        )
        .unwrap();
        assert_eq!(
            substitution_candidates("garrison", &t),
            Some(Constraint::substitution("garrison", ["defend"]).unwrap())
        );
        assert_eq!(
            substitution_candidates("instrument", &t),
            Some(Constraint::substitution("instrument", ["device"]).unwrap())
        );
        assert_eq!(substitution_candidates("castle", &t), None);
        assert_eq!(substitution_candidates("same", &t), None);
    }

    #[test]
    fn table_constraints_respect_mask() {
        let t = load_translation_table("big large 0.5\nold aged 0.3", 0.002).unwrap();
        let src = TokenSeq::from("the big old big house");
        let all = table_constraints(&src, None, &t, EditWeights::default());
        assert_eq!(all.len(), 2);
        let masked = table_constraints(
            &src,
            Some(&[false, true, false, false, false]),
            &t,
            EditWeights::default(),
        );
        assert_eq!(
            masked.constraints(),
            [Constraint::substitution("big", ["large"]).unwrap()]
        );
    }
}
