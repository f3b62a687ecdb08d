//! Edit constraints and their JSON file format.

use crate::tokens::{detokenize, tokenize, TokenSeq};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConstraintError {
    #[error("invalid constraint document: {0}")]
    Syntax(String),
    #[error("{entry}: {message}")]
    Entry { entry: String, message: String },
    #[error("invalid weight {name}={value}: weights must be finite and non-negative")]
    Weight { name: &'static str, value: f64 },
}

fn entry_err(entry: impl Into<String>, message: impl Into<String>) -> ConstraintError {
    ConstraintError::Entry {
        entry: entry.into(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Insertion,
    Deletion,
    Substitution,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::Insertion => "insertion",
            ConstraintKind::Deletion => "deletion",
            ConstraintKind::Substitution => "substitution",
        })
    }
}

/// One edit operation the decoder should replicate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    Insertion {
        phrase: TokenSeq,
    },
    Deletion {
        phrase: TokenSeq,
    },
    /// `from` is replaced by any one of `to` (an OR-group).
    Substitution {
        from: TokenSeq,
        to: Vec<TokenSeq>,
    },
}

impl Constraint {
    pub fn insertion(phrase: impl Into<TokenSeq>) -> Result<Self, ConstraintError> {
        let phrase = phrase.into();
        if phrase.is_empty() {
            return Err(entry_err("insert", "empty phrase"));
        }
        Ok(Constraint::Insertion { phrase })
    }

    pub fn deletion(phrase: impl Into<TokenSeq>) -> Result<Self, ConstraintError> {
        let phrase = phrase.into();
        if phrase.is_empty() {
            return Err(entry_err("delete", "empty phrase"));
        }
        Ok(Constraint::Deletion { phrase })
    }

    /// Duplicate alternatives are collapsed, keeping first occurrence.
    pub fn substitution<I, P>(from: impl Into<TokenSeq>, to: I) -> Result<Self, ConstraintError>
    where
        I: IntoIterator<Item = P>,
        P: Into<TokenSeq>,
    {
        let from = from.into();
        if from.is_empty() {
            return Err(entry_err("subst", "empty source phrase"));
        }
        let mut alts: Vec<TokenSeq> = Vec::new();
        for alt in to {
            let alt = alt.into();
            if alt.is_empty() {
                return Err(entry_err("subst", "empty replacement phrase"));
            }
            if alt == from {
                return Err(entry_err(
                    "subst",
                    format!("replacement equals source phrase \"{from}\""),
                ));
            }
            if !alts.contains(&alt) {
                alts.push(alt);
            }
        }
        if alts.is_empty() {
            return Err(entry_err("subst", format!("no replacement for \"{from}\"")));
        }
        Ok(Constraint::Substitution { from, to: alts })
    }

    pub fn kind(&self) -> ConstraintKind {
        match self {
            Constraint::Insertion { .. } => ConstraintKind::Insertion,
            Constraint::Deletion { .. } => ConstraintKind::Deletion,
            Constraint::Substitution { .. } => ConstraintKind::Substitution,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Insertion { phrase } => write!(f, "[insert] {phrase}"),
            Constraint::Deletion { phrase } => write!(f, "[delete] {phrase}"),
            Constraint::Substitution { from, to } => {
                let alts: Vec<String> = to.iter().map(|t| t.to_string()).collect();
                write!(f, "[substitute] ({from}, {})", alts.join(" | "))
            }
        }
    }
}

/// Per-operation weights: insertion reward, deletion penalty and
/// substitution reward/penalty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EditWeights {
    #[serde(rename = "insert")]
    pub lambda_insert: f64,
    #[serde(rename = "delete")]
    pub lambda_delete: f64,
    #[serde(rename = "subst")]
    pub lambda_subst: f64,
}

impl Default for EditWeights {
    /// Tuned values for oracle constraints on Turk.
    fn default() -> Self {
        Self {
            lambda_insert: 0.11,
            lambda_delete: 0.66,
            lambda_subst: 0.23,
        }
    }
}

impl EditWeights {
    pub fn new(lambda_insert: f64, lambda_delete: f64, lambda_subst: f64) -> Self {
        Self {
            lambda_insert,
            lambda_delete,
            lambda_subst,
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn for_kind(&self, kind: ConstraintKind) -> f64 {
        match kind {
            ConstraintKind::Insertion => self.lambda_insert,
            ConstraintKind::Deletion => self.lambda_delete,
            ConstraintKind::Substitution => self.lambda_subst,
        }
    }

    /// Rejects negative or non-finite weights; weights above 1 are accepted
    /// with a warning since the usual search range is [0, 1].
    pub fn validate(&self) -> Result<(), ConstraintError> {
        for (name, value) in [
            ("insert", self.lambda_insert),
            ("delete", self.lambda_delete),
            ("subst", self.lambda_subst),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(ConstraintError::Weight { name, value });
            }
            if value > 1.0 {
                log::warn!("edit weight {name}={value} is above 1");
            }
        }
        Ok(())
    }
}

/// An ordered constraint list. Constraints are kept grouped by kind
/// (insertions, deletions, substitutions), which is also the file order, so
/// indices are stable across a serialize/parse round trip.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConstraintSet {
    constraints: Vec<Constraint>,
    pub weights: EditWeights,
}

impl ConstraintSet {
    pub fn new(mut constraints: Vec<Constraint>, weights: EditWeights) -> Self {
        constraints.sort_by_key(Constraint::kind);
        Self {
            constraints,
            weights,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Constraint> {
        self.constraints.get(index)
    }

    pub fn count(&self, kind: ConstraintKind) -> usize {
        self.constraints.iter().filter(|c| c.kind() == kind).count()
    }

    pub fn with_weights(mut self, weights: EditWeights) -> Self {
        self.weights = weights;
        self
    }

    /// Serializes to the single-line JSON constraint format.
    pub fn to_json(&self) -> String {
        let phrase = |p: &TokenSeq| Value::String(detokenize(p));
        let mut insert = Vec::new();
        let mut delete = Vec::new();
        let mut subst = Vec::new();
        for c in &self.constraints {
            match c {
                Constraint::Insertion { phrase: p } => insert.push(phrase(p)),
                Constraint::Deletion { phrase: p } => delete.push(phrase(p)),
                Constraint::Substitution { from, to } => subst.push(Value::Array(vec![
                    phrase(from),
                    Value::Array(to.iter().map(phrase).collect()),
                ])),
            }
        }
        let mut doc = Map::new();
        doc.insert("insert".into(), Value::Array(insert));
        doc.insert("delete".into(), Value::Array(delete));
        doc.insert("subst".into(), Value::Array(subst));
        doc.insert(
            "weights".into(),
            serde_json::to_value(self.weights).expect("weights serialize"),
        );
        Value::Object(doc).to_string()
    }
}

fn parse_phrase(v: &Value, entry: &str) -> Result<TokenSeq, ConstraintError> {
    let s = v
        .as_str()
        .ok_or_else(|| entry_err(entry, "phrase must be a string"))?;
    let p = tokenize(s);
    if p.is_empty() {
        return Err(entry_err(entry, "empty phrase"));
    }
    Ok(p)
}

fn list<'a>(doc: &'a Map<String, Value>, key: &str) -> Result<&'a [Value], ConstraintError> {
    match doc.get(key) {
        None | Some(Value::Null) => Ok(&[]),
        Some(Value::Array(items)) => Ok(items),
        Some(_) => Err(entry_err(key, "expected a list")),
    }
}

/// Parses one constraint document (a JSON object with optional `insert`,
/// `delete`, `subst` and `weights` keys).
pub fn parse_constraints(doc: &str) -> Result<ConstraintSet, ConstraintError> {
    let value: Value =
        serde_json::from_str(doc).map_err(|e| ConstraintError::Syntax(e.to_string()))?;
    parse_constraint_value(&value)
}

pub fn parse_constraint_value(value: &Value) -> Result<ConstraintSet, ConstraintError> {
    let doc = value
        .as_object()
        .ok_or_else(|| ConstraintError::Syntax("expected a JSON object".into()))?;
    if let Some(key) = doc
        .keys()
        .find(|k| !matches!(k.as_str(), "insert" | "delete" | "subst" | "weights"))
    {
        return Err(entry_err(key.clone(), "unknown key"));
    }

    let mut constraints = Vec::new();
    for (i, v) in list(doc, "insert")?.iter().enumerate() {
        let entry = format!("insert[{i}]");
        constraints.push(Constraint::Insertion {
            phrase: parse_phrase(v, &entry)?,
        });
    }
    for (i, v) in list(doc, "delete")?.iter().enumerate() {
        let entry = format!("delete[{i}]");
        constraints.push(Constraint::Deletion {
            phrase: parse_phrase(v, &entry)?,
        });
    }
    for (i, v) in list(doc, "subst")?.iter().enumerate() {
        let entry = format!("subst[{i}]");
        let pair = v
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| entry_err(&entry, "expected [from, [to, ...]]"))?;
        let from = parse_phrase(&pair[0], &entry)?;
        let alts = pair[1]
            .as_array()
            .ok_or_else(|| entry_err(&entry, "replacements must be a list"))?;
        let to = alts
            .iter()
            .map(|a| parse_phrase(a, &entry))
            .collect::<Result<Vec<_>, _>>()?;
        let c = Constraint::substitution(from, to).map_err(|e| match e {
            ConstraintError::Entry { message, .. } => entry_err(&entry, message),
            other => other,
        })?;
        constraints.push(c);
    }

    let mut weights = EditWeights::default();
    match doc.get("weights") {
        None | Some(Value::Null) => {}
        Some(Value::Object(w)) => {
            for (key, slot) in [
                ("insert", &mut weights.lambda_insert),
                ("delete", &mut weights.lambda_delete),
                ("subst", &mut weights.lambda_subst),
            ] {
                if let Some(v) = w.get(key) {
                    *slot = v
                        .as_f64()
                        .ok_or_else(|| entry_err(format!("weights.{key}"), "expected a number"))?;
                }
            }
            if let Some(key) = w
                .keys()
                .find(|k| !matches!(k.as_str(), "insert" | "delete" | "subst"))
            {
                return Err(entry_err(format!("weights.{key}"), "unknown weight"));
            }
        }
        Some(_) => return Err(entry_err("weights", "expected an object")),
    }
    weights.validate()?;
    Ok(ConstraintSet::new(constraints, weights))
}
