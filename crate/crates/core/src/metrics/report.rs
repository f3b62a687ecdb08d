use serde::{Deserialize, Serialize};

use super::{
    bleu, corpus_sari, fkgl, mean_len, satisfaction_rate, DelMode, MetricError, SariScore,
    SatisfactionRates,
};
use crate::constraint::ConstraintSet;
use crate::tokens::TokenSeq;

pub struct EvaluationInput<'a> {
    /// Needed for SARI; SARI is skipped without it.
    pub sources: Option<&'a [TokenSeq]>,
    pub outputs: &'a [TokenSeq],
    pub references: &'a [Vec<TokenSeq>],
    pub constraints: Option<&'a [ConstraintSet]>,
    pub del_mode: DelMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub sentences: usize,
    pub del_mode: DelMode,
    pub sari: Option<SariScore>,
    pub bleu: f64,
    pub fkgl: f64,
    pub mean_len: f64,
    pub satisfaction: Option<SatisfactionRates>,
}

pub fn evaluate(input: &EvaluationInput<'_>) -> Result<EvaluationReport, MetricError> {
    let sari = input
        .sources
        .map(|s| corpus_sari(s, input.outputs, input.references, input.del_mode))
        .transpose()?;
    let satisfaction = input
        .constraints
        .map(|c| satisfaction_rate(input.outputs, c))
        .transpose()?;
    Ok(EvaluationReport {
        sentences: input.outputs.len(),
        del_mode: input.del_mode,
        sari,
        bleu: bleu(input.outputs, input.references)?,
        fkgl: fkgl(input.outputs)?,
        mean_len: mean_len(input.outputs)?,
        satisfaction,
    })
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text table: SARI with its breakdown, BLEU, FKGL, length
    /// and per-type satisfaction percentages.
    pub fn to_table(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"));
        let s = self.sari.as_ref();
        let sat = |f: fn(&SatisfactionRates) -> Option<f64>| self.satisfaction.as_ref().and_then(f);
        let header = [
            "SARI", "add", "keep", "del", "BLEU", "FKGL", "Len", "Ins%", "Del%", "Sub%",
        ];
        let row = [
            fmt(s.map(|s| s.overall)),
            fmt(s.map(|s| s.add)),
            fmt(s.map(|s| s.keep)),
            fmt(s.map(|s| s.del)),
            fmt(Some(self.bleu)),
            fmt(Some(self.fkgl)),
            fmt(Some(self.mean_len)),
            fmt(sat(|r| r.insertion.percent())),
            fmt(sat(|r| r.deletion.percent())),
            fmt(sat(|r| r.substitution.percent())),
        ];
        let widths: Vec<usize> = header
            .iter()
            .zip(&row)
            .map(|(h, r)| h.len().max(r.len()))
            .collect();
        let line = |cells: Vec<&str>| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        format!(
            "{}\n{}\n",
            line(header.to_vec()),
            line(row.iter().map(String::as_str).collect())
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_and_json() {
        let outs: Vec<TokenSeq> = vec!["the cat sat .".into(), "a dog ran .".into()];
        let refs: Vec<Vec<TokenSeq>> = outs.iter().map(|o| vec![o.clone()]).collect();
        let r = evaluate(&EvaluationInput {
            sources: Some(&outs),
            outputs: &outs,
            references: &refs,
            constraints: None,
            del_mode: DelMode::F1,
        })
        .unwrap();
        assert!((r.bleu - 100.0).abs() < 1e-9);
        let table = r.to_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].len(), lines[1].len());
        assert!(lines[0].trim_start().starts_with("SARI"));
        assert!(lines[1].ends_with('-'));
        let back: EvaluationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
