//! Dialog corpora as JSON-lines, and dialog-level train/test resampling.
//!
//! Line 1 is a header object
//! `{"schema_version", "feature_names", "action_set", "reward_config"}`; every
//! following line is one transition
//! `{"dialog_id", "turn", "s", "a", "s_next", "terminal"}`. Floats are written
//! in scientific notation with 17 significant digits, so saving a loaded
//! canonical file reproduces it byte for byte.

mod format;
mod resample;

pub use format::{load_corpus, parse_corpus, save_corpus, write_corpus};
pub use resample::{resample_splits, ResamplePlan};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialog_core::{RewardConfig, Transition, FEATURE_SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: schema mismatch: {message}")]
    SchemaMismatch { line: usize, message: String },
    #[error("dialog `{0}` has no terminal transition")]
    MissingTerminal(String),
    #[error("dialog `{dialog_id}` is malformed: {message}")]
    MalformedDialog { dialog_id: String, message: String },
    #[error("cannot serialize non-finite value in dialog `{0}`")]
    NonFinite(String),
    #[error("invalid resample plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusHeader {
    pub schema_version: u32,
    pub feature_names: Vec<String>,
    pub action_set: Vec<String>,
    pub reward_config: RewardConfig,
}

impl CorpusHeader {
    pub fn new(
        feature_names: Vec<String>,
        action_set: Vec<String>,
        reward_config: RewardConfig,
    ) -> Self {
        CorpusHeader {
            schema_version: FEATURE_SCHEMA_VERSION,
            feature_names,
            action_set,
            reward_config,
        }
    }

    pub fn action_index(&self, label: &str) -> Option<usize> {
        self.action_set.iter().position(|a| a == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub header: CorpusHeader,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusStats {
    pub dialogs: usize,
    pub turns: usize,
}

impl Corpus {
    pub fn new(header: CorpusHeader, transitions: Vec<Transition>) -> Result<Self, CorpusError> {
        let corpus = Corpus {
            header,
            transitions,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    /// Contiguous runs of transitions sharing a dialog id.
    pub fn dialogs(&self) -> Vec<&[Transition]> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.transitions.len() {
            if i == self.transitions.len()
                || self.transitions[i].dialog_id != self.transitions[start].dialog_id
            {
                if i > start {
                    out.push(&self.transitions[start..i]);
                }
                start = i;
            }
        }
        out
    }

    pub fn stats(&self) -> CorpusStats {
        CorpusStats {
            dialogs: self.dialogs().len(),
            turns: self.transitions.len(),
        }
    }

    /// Starting states `s` of every transition.
    pub fn states(&self) -> Vec<&[f64]> {
        self.transitions.iter().map(|t| t.s.as_slice()).collect()
    }

    /// A corpus made of the given dialogs (as returned by [`Corpus::dialogs`]).
    pub fn from_dialogs(header: CorpusHeader, dialogs: &[&[Transition]]) -> Self {
        Corpus {
            header,
            transitions: dialogs.iter().flat_map(|d| d.iter().cloned()).collect(),
        }
    }

    /// Checks record arity, actions, and dialog structure. Line numbers in
    /// errors assume the canonical file layout (header on line 1).
    pub fn validate(&self) -> Result<(), CorpusError> {
        let width = self.header.feature_names.len();
        for (i, t) in self.transitions.iter().enumerate() {
            let line = i + 2;
            if t.s.len() != width || t.s_next.len() != width {
                return Err(CorpusError::SchemaMismatch {
                    line,
                    message: format!(
                        "expected {width} features, got {} and {}",
                        t.s.len(),
                        t.s_next.len()
                    ),
                });
            }
            if self.header.action_index(&t.a).is_none() {
                return Err(CorpusError::SchemaMismatch {
                    line,
                    message: format!("action `{}` not in action_set", t.a),
                });
            }
        }
        let mut seen = HashSet::new();
        for dialog in self.dialogs() {
            let id = &dialog[0].dialog_id;
            if !seen.insert(id.as_str()) {
                return Err(CorpusError::MalformedDialog {
                    dialog_id: id.clone(),
                    message: "records are not contiguous".into(),
                });
            }
            for (k, t) in dialog.iter().enumerate() {
                if t.turn != k {
                    return Err(CorpusError::MalformedDialog {
                        dialog_id: id.clone(),
                        message: format!("expected turn {k}, found {}", t.turn),
                    });
                }
                if t.terminal && k + 1 != dialog.len() {
                    return Err(CorpusError::MalformedDialog {
                        dialog_id: id.clone(),
                        message: format!("terminal transition at turn {k} is not the last"),
                    });
                }
            }
            if !dialog.last().expect("non-empty").terminal {
                return Err(CorpusError::MissingTerminal(id.clone()));
            }
        }
        Ok(())
    }
}
