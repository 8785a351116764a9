//! Comparison policies: the template with hand-set parameters, and online
//! Q-learning with a linear approximator over the dialog features.

mod linear_q;

pub use linear_q::{
    train_linear_q, Environment, LinearQConfig, LinearQPolicy, SimEnvironment, Step,
};

use thiserror::Error;

use crate::policy_dsl::{DslError, ParameterVector, TemplateAst};
use crate::simulator::{PolicyError, TemplatePolicy};
use crate::HEURISTIC_PARAMS;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("weights became non-finite in episode {episode}; lower the learning rate")]
    DivergenceDetected { episode: usize },
    #[error("environment: {0}")]
    Environment(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("weights file: {0}")]
    Serialization(String),
    #[error("weights schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The template evaluated with frozen parameters.
pub fn rule_based_policy(
    ast: &TemplateAst,
    params: ParameterVector,
) -> Result<TemplatePolicy<'_>, DslError> {
    TemplatePolicy::new(ast, params)
}

/// [`rule_based_policy`] with [`HEURISTIC_PARAMS`].
pub fn heuristic_policy(ast: &TemplateAst) -> Result<TemplatePolicy<'_>, DslError> {
    rule_based_policy(ast, ParameterVector::new(HEURISTIC_PARAMS.to_vec())?)
}
