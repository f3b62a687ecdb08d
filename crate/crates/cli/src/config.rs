//! JSON run configuration. Command-line flags override file values.

use std::path::{Path, PathBuf};

use editdec::constraint::EditWeights;
use editdec::decoder::DecoderConfig;
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliResult, Context};

pub const DEFAULT_COPY_WEIGHT: f64 = 0.4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub source: Option<PathBuf>,
    pub references: Vec<PathBuf>,
    pub constraints: Option<PathBuf>,
    /// Serialized n-gram model.
    pub lm: Option<PathBuf>,
    /// `host:port` of a scorer speaking the line protocol.
    pub endpoint: Option<String>,
    pub copy_weight: f64,
    pub decoder: DecoderConfig,
    /// Replaces the weights stored in the constraint file when set.
    pub weights: Option<EditWeights>,
    pub workers: Option<usize>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            source: None,
            references: Vec::new(),
            constraints: None,
            lm: None,
            endpoint: None,
            copy_weight: DEFAULT_COPY_WEIGHT,
            decoder: DecoderConfig::default(),
            weights: None,
            workers: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).data_ctx(format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }

    /// Checks settings and that every referenced path exists.
    pub fn validate(&self) -> CliResult<()> {
        self.decoder.validate().map_err(usage)?;
        if let Some(w) = &self.weights {
            w.validate().map_err(usage)?;
        }
        if !(0.0..=1.0).contains(&self.copy_weight) {
            return Err(usage(format!(
                "copy_weight must lie in [0, 1], got {}",
                self.copy_weight
            )));
        }
        if self.workers == Some(0) {
            return Err(usage("workers must be at least 1"));
        }
        if self.lm.is_some() && self.endpoint.is_some() {
            return Err(usage("give either an LM file or an endpoint, not both"));
        }
        let paths = self
            .source
            .iter()
            .chain(&self.references)
            .chain(&self.constraints)
            .chain(&self.lm);
        for p in paths {
            if !p.exists() {
                return Err(usage(format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
