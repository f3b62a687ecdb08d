use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{check_len, MetricError};
use crate::tokens::TokenSeq;

/// How the deletion component is scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelMode {
    #[default]
    F1,
    Precision,
}

impl std::str::FromStr for DelMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f1" => Ok(DelMode::F1),
            "precision" => Ok(DelMode::Precision),
            other => Err(format!(
                "unknown deletion mode {other:?} (expected f1 or precision)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NgramSari {
    pub add: f64,
    pub keep: f64,
    pub del: f64,
}

/// SARI and its operation breakdown, each on a 0-100 scale.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SariScore {
    pub overall: f64,
    pub add: f64,
    pub keep: f64,
    pub del: f64,
    /// Scores for n = 1..=4.
    pub per_n: [NgramSari; 4],
}

type Counts<'a> = BTreeMap<&'a [String], u64>;

fn ngrams(tokens: &[String], n: usize) -> Counts<'_> {
    let mut c = Counts::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *c.entry(g).or_default() += 1;
        }
    }
    c
}

/// Ratio with the empty-denominator rule: 1 when both sides are empty,
/// 0 when only the denominator is.
fn ratio(num: f64, den: usize, other_empty: bool) -> f64 {
    if den > 0 {
        num / den as f64
    } else if other_empty {
        1.0
    } else {
        0.0
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn score_n(
    src: &[String],
    out: &[String],
    refs: &[Vec<String>],
    n: usize,
    mode: DelMode,
) -> NgramSari {
    let k = refs.len() as u64;
    let s_rep: Counts = ngrams(src, n)
        .into_iter()
        .map(|(g, c)| (g, c * k))
        .collect();
    let c_rep: Counts = ngrams(out, n)
        .into_iter()
        .map(|(g, c)| (g, c * k))
        .collect();
    let mut r_all = Counts::new();
    for r in refs {
        for (g, c) in ngrams(r, n) {
            *r_all.entry(g).or_default() += c;
        }
    }
    let get = |m: &Counts, g: &[String]| m.get(g).copied().unwrap_or(0);

    // keep: n-grams of the source retained in the output
    let mut keep_sys = 0usize;
    let mut keep_good_p = 0.0;
    let mut keep_good_r = 0.0;
    for (&g, &s) in &s_rep {
        let kept = s.min(get(&c_rep, g));
        if kept == 0 {
            continue;
        }
        keep_sys += 1;
        let good = kept.min(get(&r_all, g));
        if good > 0 {
            keep_good_p += good as f64 / kept as f64;
            keep_good_r += good as f64 / s.min(get(&r_all, g)) as f64;
        }
    }
    let keep_all = s_rep.keys().filter(|g| get(&r_all, g) > 0).count();
    let keep = f1(
        ratio(keep_good_p, keep_sys, keep_all == 0),
        ratio(keep_good_r, keep_all, keep_sys == 0),
    );

    // deletion: n-grams of the source dropped from the output
    let mut del_sys = 0usize;
    let mut del_good_p = 0.0;
    let mut del_good_r = 0.0;
    for (&g, &s) in &s_rep {
        let dropped = s.saturating_sub(get(&c_rep, g));
        if dropped == 0 {
            continue;
        }
        del_sys += 1;
        let good = dropped.saturating_sub(get(&r_all, g));
        if good > 0 {
            del_good_p += good as f64 / dropped as f64;
            del_good_r += good as f64 / s.saturating_sub(get(&r_all, g)) as f64;
        }
    }
    let del_all = s_rep.iter().filter(|(g, &s)| s > get(&r_all, g)).count();
    let del_p = ratio(del_good_p, del_sys, del_all == 0);
    let del = match mode {
        DelMode::Precision => del_p,
        DelMode::F1 => f1(del_p, ratio(del_good_r, del_all, del_sys == 0)),
    };

    // addition: new n-grams, set-based
    let added: BTreeSet<&[String]> = c_rep
        .keys()
        .filter(|g| !s_rep.contains_key(*g))
        .copied()
        .collect();
    let add_all: BTreeSet<&[String]> = r_all
        .keys()
        .filter(|g| !s_rep.contains_key(*g))
        .copied()
        .collect();
    let add_good = added.intersection(&add_all).count() as f64;
    let add = f1(
        ratio(add_good, added.len(), add_all.is_empty()),
        ratio(add_good, add_all.len(), added.is_empty()),
    );

    NgramSari {
        add: 100.0 * add,
        keep: 100.0 * keep,
        del: 100.0 * del,
    }
}

/// Sentence-level SARI over lowercased tokens, n = 1..=4.
pub fn sari(
    src: &TokenSeq,
    out: &TokenSeq,
    refs: &[TokenSeq],
    mode: DelMode,
) -> Result<SariScore, MetricError> {
    if refs.is_empty() {
        return Err(MetricError::EmptyReferences { index: 0 });
    }
    let lower = |t: &TokenSeq| t.lowercased().into_inner();
    let src = lower(src);
    let out = lower(out);
    let refs: Vec<Vec<String>> = refs.iter().map(lower).collect();
    let mut per_n = [NgramSari::default(); 4];
    for (i, slot) in per_n.iter_mut().enumerate() {
        *slot = score_n(&src, &out, &refs, i + 1, mode);
    }
    let mean = |f: fn(&NgramSari) -> f64| per_n.iter().map(f).sum::<f64>() / 4.0;
    let (add, keep, del) = (mean(|s| s.add), mean(|s| s.keep), mean(|s| s.del));
    Ok(SariScore {
        overall: (add + keep + del) / 3.0,
        add,
        keep,
        del,
        per_n,
    })
}

/// Mean of sentence-level scores, component by component.
pub fn corpus_sari(
    sources: &[TokenSeq],
    outputs: &[TokenSeq],
    refs: &[Vec<TokenSeq>],
    mode: DelMode,
) -> Result<SariScore, MetricError> {
    check_len("outputs", sources.len(), outputs.len())?;
    check_len("references", sources.len(), refs.len())?;
    if sources.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut total = SariScore::default();
    for (i, ((s, o), r)) in sources.iter().zip(outputs).zip(refs).enumerate() {
        let one = sari(s, o, r, mode).map_err(|_| MetricError::EmptyReferences { index: i })?;
        total.add += one.add;
        total.keep += one.keep;
        total.del += one.del;
        for (t, n) in total.per_n.iter_mut().zip(one.per_n) {
            t.add += n.add;
            t.keep += n.keep;
            t.del += n.del;
        }
    }
    let m = sources.len() as f64;
    total.add /= m;
    total.keep /= m;
    total.del /= m;
    for t in &mut total.per_n {
        t.add /= m;
        t.keep /= m;
        t.del /= m;
    }
    total.overall = (total.add + total.keep + total.del) / 3.0;
    Ok(total)
}
