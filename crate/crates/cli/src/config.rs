//! Experiment config documents.
//!
//! A config is one JSON object. Unknown keys are rejected so that a typo
//! never silently falls back to a default.
//!
//! ```json
//! {
//!   "alphabet": ["a", "b", "c"],
//!   "distributions": [
//!     {"name": "P1", "weights": [0.1, 0.7, 0.2]},
//!     {"name": "P2", "weights": [0.05, 0.55, 0.4]}
//!   ],
//!   "gamma": 0.02,
//!   "n_train": 400,
//!   "trials": 2000,
//!   "seed": 1,
//!   "true_class": "P2",
//!   "test": {"kind": "sequential"}
//! }
//! ```

use std::fs;
use std::path::Path;
use std::sync::Arc;

use seqclass::simulator::TestKind;
use seqclass::{Alphabet, Distribution};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedDistribution {
    pub name: String,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Symbol labels; `0, 1, ...` when absent.
    pub alphabet: Option<Vec<String>>,
    #[serde(default)]
    pub distributions: Vec<NamedDistribution>,
    pub gamma: Option<f64>,
    pub gamma_grid: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub n_train: Option<u64>,
    pub cap: Option<u64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    /// Name of the distribution generating the test samples.
    pub true_class: Option<String>,
    pub priors: Option<Vec<f64>>,
    pub test: Option<TestKind>,
    pub workers: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::validation("--config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::validation("config", e.to_string()))
    }

    /// Validated distributions over a shared alphabet, with their names.
    pub fn distributions(&self) -> Result<(Vec<String>, Vec<Distribution>), CliError> {
        let Some(first) = self.distributions.first() else {
            return Err(CliError::validation("distributions", "no distributions listed"));
        };
        let alphabet = match &self.alphabet {
            Some(labels) => Alphabet::new(labels.iter().cloned()),
            None => Alphabet::numbered(first.weights.len()),
        }
        .map_err(|e| CliError::validation("alphabet", e.to_string()))?;
        let alphabet = Arc::new(alphabet);
        let mut names: Vec<String> = Vec::new();
        let mut dists = Vec::new();
        for (i, d) in self.distributions.iter().enumerate() {
            let field = format!("distributions[{i}] ({})", d.name);
            if names.contains(&d.name) {
                return Err(CliError::validation(field, "duplicate name"));
            }
            let dist = Distribution::new(alphabet.clone(), d.weights.clone())
                .map_err(|e| CliError::validation(&field, e.to_string()))?;
            names.push(d.name.clone());
            dists.push(dist);
        }
        Ok((names, dists))
    }

    pub fn class_index(&self, names: &[String], name: &str) -> Result<usize, CliError> {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CliError::validation("true_class", format!("no distribution named {name:?}")))
    }
}

/// Parses a comma-separated weight list such as `0.1,0.7,0.2`.
pub fn parse_weights(field: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::validation(field, format!("{s:?}: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_keys() {
        let err = serde_json::from_str::<ConfigFile>(r#"{"gama": 0.1}"#).unwrap_err();
        assert!(err.to_string().contains("gama"));
    }

    #[test]
    fn parses_test_kinds() {
        let cfg: ConfigFile = serde_json::from_str(
            r#"{"test": {"kind": "gutman", "n_test": 40, "lambda": 0.01, "mode": "scaled"}}"#,
        )
        .unwrap();
        assert!(matches!(cfg.test, Some(TestKind::Gutman { n_test: 40, .. })));
    }

    #[test]
    fn weights_list() {
        assert_eq!(parse_weights("--p", "0.5, 0.5").unwrap(), vec![0.5, 0.5]);
        assert!(parse_weights("--p", "0.5,x").is_err());
    }
}
