use serde::{Deserialize, Serialize};

use super::trees::{ExtraTrees, ForestConfig};
use super::{argmax, BatchError};
use crate::corpus_io::Corpus;
use crate::dialog_core::FEATURE_SCHEMA_VERSION;

fn one_hot_input(state: &[f64], action: usize, n_actions: usize, out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(state);
    out.extend((0..n_actions).map(|a| if a == action { 1.0 } else { 0.0 }));
}

/// `Q(s, a)` regressor over the state features followed by an action one-hot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QModel {
    pub(crate) forest: ExtraTrees,
    pub(crate) actions: Vec<String>,
    pub(crate) feature_names: Vec<String>,
    pub(crate) schema_version: u32,
}

impl QModel {
    /// Fits `targets[i]` at `(states[i], actions[i])`.
    pub fn fit(
        feature_names: &[String],
        action_set: &[String],
        states: &[&[f64]],
        actions: &[usize],
        targets: &[f64],
        cfg: &ForestConfig,
    ) -> Result<Self, BatchError> {
        let x = Self::design_matrix(feature_names.len(), action_set.len(), states, actions)?;
        let forest = ExtraTrees::fit(&x, feature_names.len() + action_set.len(), targets, 1, cfg)?;
        Ok(QModel {
            forest,
            actions: action_set.to_vec(),
            feature_names: feature_names.to_vec(),
            schema_version: FEATURE_SCHEMA_VERSION,
        })
    }

    pub(crate) fn design_matrix(
        d: usize,
        n_actions: usize,
        states: &[&[f64]],
        actions: &[usize],
    ) -> Result<Vec<f64>, BatchError> {
        if states.is_empty() {
            return Err(BatchError::EmptyTrainingSet);
        }
        if states.len() != actions.len() {
            return Err(BatchError::FeatureArityMismatch {
                expected: states.len(),
                got: actions.len(),
            });
        }
        let mut x = Vec::with_capacity(states.len() * (d + n_actions));
        let mut row = Vec::new();
        for (s, &a) in states.iter().zip(actions) {
            if s.len() != d {
                return Err(BatchError::FeatureArityMismatch {
                    expected: d,
                    got: s.len(),
                });
            }
            one_hot_input(s, a, n_actions, &mut row);
            x.extend_from_slice(&row);
        }
        Ok(x)
    }

    pub(crate) fn from_forest(
        forest: ExtraTrees,
        feature_names: &[String],
        action_set: &[String],
    ) -> Self {
        QModel {
            forest,
            actions: action_set.to_vec(),
            feature_names: feature_names.to_vec(),
            schema_version: FEATURE_SCHEMA_VERSION,
        }
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn schema_version(&self) -> u32 {
        self.schema_version
    }

    pub fn action_index(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == label)
    }

    pub fn q(&self, state: &[f64], action: usize) -> f64 {
        let mut row = Vec::with_capacity(state.len() + self.actions.len());
        one_hot_input(state, action, self.actions.len(), &mut row);
        self.forest.predict_one(&row)
    }

    pub fn q_values(&self, state: &[f64]) -> Vec<f64> {
        let mut row = Vec::with_capacity(state.len() + self.actions.len());
        let mut out = [0.0];
        (0..self.actions.len())
            .map(|a| {
                one_hot_input(state, a, self.actions.len(), &mut row);
                self.forest.predict_into(&row, &mut out);
                out[0]
            })
            .collect()
    }

    /// Greedy action; ties go to the lowest action index.
    pub fn greedy(&self, state: &[f64]) -> usize {
        argmax(&self.q_values(state))
    }

    pub fn max_q(&self, state: &[f64]) -> f64 {
        self.q_values(state)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `P(a | s)` estimated by a multi-output forest on one-hot action targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionClassifier {
    pub(crate) forest: ExtraTrees,
    pub(crate) actions: Vec<String>,
    pub(crate) feature_names: Vec<String>,
    pub(crate) schema_version: u32,
}

impl ActionClassifier {
    pub fn fit(
        feature_names: &[String],
        action_set: &[String],
        states: &[&[f64]],
        actions: &[usize],
        cfg: &ForestConfig,
    ) -> Result<Self, BatchError> {
        if states.is_empty() {
            return Err(BatchError::EmptyTrainingSet);
        }
        let d = feature_names.len();
        let m = action_set.len();
        let mut x = Vec::with_capacity(states.len() * d);
        let mut y = vec![0.0; states.len() * m];
        for (i, (s, &a)) in states.iter().zip(actions).enumerate() {
            if s.len() != d {
                return Err(BatchError::FeatureArityMismatch {
                    expected: d,
                    got: s.len(),
                });
            }
            if a >= m {
                return Err(BatchError::UnknownAction(format!("#{a}")));
            }
            x.extend_from_slice(s);
            y[i * m + a] = 1.0;
        }
        let forest = ExtraTrees::fit(&x, d, &y, m, cfg)?;
        Ok(ActionClassifier {
            forest,
            actions: action_set.to_vec(),
            feature_names: feature_names.to_vec(),
            schema_version: FEATURE_SCHEMA_VERSION,
        })
    }

    /// Trains on the logged `(s, a)` pairs of a corpus.
    pub fn fit_corpus(corpus: &Corpus, cfg: &ForestConfig) -> Result<Self, BatchError> {
        let (states, actions) = logged_pairs(corpus)?;
        Self::fit(
            &corpus.header.feature_names,
            &corpus.header.action_set,
            &states,
            &actions,
            cfg,
        )
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn schema_version(&self) -> u32 {
        self.schema_version
    }

    pub fn proba(&self, state: &[f64]) -> Vec<f64> {
        let mut p = self.forest.predict(state);
        let total: f64 = p.iter().sum();
        if total > 0.0 {
            p.iter_mut().for_each(|v| *v /= total);
        }
        p
    }

    /// Most probable action; ties go to the lowest action index.
    pub fn predict(&self, state: &[f64]) -> usize {
        argmax(&self.proba(state))
    }
}

pub(crate) fn logged_pairs(corpus: &Corpus) -> Result<(Vec<&[f64]>, Vec<usize>), BatchError> {
    let mut states = Vec::with_capacity(corpus.transitions.len());
    let mut actions = Vec::with_capacity(corpus.transitions.len());
    for t in &corpus.transitions {
        states.push(t.s.as_slice());
        actions.push(
            corpus
                .header
                .action_index(&t.a)
                .ok_or_else(|| BatchError::UnknownAction(t.a.clone()))?,
        );
    }
    Ok((states, actions))
}
