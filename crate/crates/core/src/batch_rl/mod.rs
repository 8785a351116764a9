//! Learning from logged dialogs: fitted Q-iteration over extremely randomized
//! trees, a supervised action classifier, corpus fitness functions for the GA,
//! and off-policy evaluation of a fixed policy.

mod comparison;
mod fitness;
mod fqi;
mod models;
mod persist;
mod trees;

pub use comparison::{build_comparison_dms, ComparisonDm, ComparisonKind};
pub use fitness::{
    fitness_npoints, fitness_qval, CorpusFitness, CorpusFitnessKind, QValConfig,
    TemplateCorpusPolicy,
};
pub use fqi::{evaluate_policy_on_corpus, fitted_q_iteration, FittedQConfig, FittedQOutput};
pub use models::{ActionClassifier, QModel};
pub use trees::{ExtraTrees, ForestConfig};

use thiserror::Error;

use crate::dialog_core::{reward, RewardConfig};
use crate::policy_dsl::DslError;

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("feature arity mismatch: expected {expected}, got {got}")]
    FeatureArityMismatch { expected: usize, got: usize },
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("dialog `{dialog_id}` is malformed: {message}")]
    MalformedEpisode { dialog_id: String, message: String },
    #[error("action `{0}` is not in the model's action set")]
    UnknownAction(String),
    #[error("templates with structural parameters cannot be scored on a corpus")]
    StructuralParamForbidden,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("model file: {0}")]
    Serialization(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immediate reward of a stored transition.
pub trait RewardModel: Sync {
    fn reward(&self, s: &[f64], a: &str, s_next: &[f64]) -> f64;
}

impl<F: Fn(&[f64], &str, &[f64]) -> f64 + Sync> RewardModel for F {
    fn reward(&self, s: &[f64], a: &str, s_next: &[f64]) -> f64 {
        self(s, a, s_next)
    }
}

/// Dialog rewards read off named feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRewards {
    pub feature_names: Vec<String>,
    pub config: RewardConfig,
}

impl FeatureRewards {
    pub fn new(feature_names: Vec<String>, config: RewardConfig) -> Self {
        FeatureRewards {
            feature_names,
            config,
        }
    }

    /// Rewards declared in a corpus header.
    pub fn for_corpus(corpus: &crate::corpus_io::Corpus) -> Self {
        Self::new(
            corpus.header.feature_names.clone(),
            corpus.header.reward_config,
        )
    }
}

impl RewardModel for FeatureRewards {
    fn reward(&self, s: &[f64], a: &str, s_next: &[f64]) -> f64 {
        let names = self.feature_names.as_slice();
        reward(&(names, s), a, &(names, s_next), &self.config)
    }
}

/// A policy over corpus feature vectors, answering with an index into the
/// corpus action set.
pub trait CorpusPolicy: Sync {
    fn choose(&self, state: &[f64]) -> Result<usize, BatchError>;
}

impl<F: Fn(&[f64]) -> usize + Sync> CorpusPolicy for F {
    fn choose(&self, state: &[f64]) -> Result<usize, BatchError> {
        Ok(self(state))
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
