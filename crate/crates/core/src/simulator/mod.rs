//! Agenda-based user simulation over a noisy SLU channel, the episode runner,
//! and the simulation fitness (mean discounted return).

mod channel;
mod collect;
mod episode;
mod ontology;
mod tracker;
mod user;

pub use channel::{corrupt, ConfidenceModel, NoiseConfig};
pub use collect::collect_corpus;
pub use episode::{
    fitness_simulation, run_episode, simulate_policy, DialogSession, EpisodeLog, EpisodeOutcome,
    SessionStep, SimulationFitness, SimulationSummary, TurnRecord,
};
pub use ontology::{Ontology, SlotDef};
pub use tracker::track;
pub use user::{Agenda, UserGoal, UserSimulator, UserTurn};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialog_core::{DialogState, RewardConfig, SystemAct};
use crate::policy_dsl::{evaluate_policy, ActionDecision, DslError, ParameterVector, TemplateAst};
use crate::rng::RandomStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("action `{0}` is not supported by the simulated domain")]
    UnsupportedAction(String),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("policy failed at turn {turn}: {source}")]
    Policy {
        turn: usize,
        #[source]
        source: PolicyError,
    },
    #[error("invalid ontology: {0}")]
    Ontology(String),
    #[error("invalid simulation config: {0}")]
    Config(String),
}

/// Maps a dialog state to a system action.
pub trait DialogPolicy: Sync {
    fn act(&self, state: &DialogState) -> Result<SystemAct, PolicyError>;
}

impl<F> DialogPolicy for F
where
    F: Fn(&DialogState) -> Result<SystemAct, PolicyError> + Sync,
{
    fn act(&self, state: &DialogState) -> Result<SystemAct, PolicyError> {
        self(state)
    }
}

/// A template instantiated with concrete parameters.
#[derive(Debug, Clone)]
pub struct TemplatePolicy<'a> {
    pub ast: &'a TemplateAst,
    pub params: ParameterVector,
}

impl<'a> TemplatePolicy<'a> {
    pub fn new(ast: &'a TemplateAst, params: ParameterVector) -> Result<Self, DslError> {
        if params.len() != ast.param_count {
            return Err(DslError::ArityMismatch {
                expected: ast.param_count,
                got: params.len(),
            });
        }
        Ok(TemplatePolicy { ast, params })
    }
}

impl DialogPolicy for TemplatePolicy<'_> {
    fn act(&self, state: &DialogState) -> Result<SystemAct, PolicyError> {
        let decision = evaluate_policy(self.ast, &self.params, state)?;
        resolve_action(state, &decision)
    }
}

/// Fills in slot-value content for a decided action label.
///
/// `Request` targets the slot the user just denied, else the weakest slot.
/// `ExplicitConf` confirms the top value of the weakest slot (a `Request` if
/// that slot is still empty). `Offer` queries with every slot whose top score
/// exceeds its `filter` structural parameter (0 when absent).
pub fn resolve_action(
    state: &DialogState,
    decision: &ActionDecision<'_>,
) -> Result<SystemAct, PolicyError> {
    resolve_label(
        state,
        decision.act,
        decision.structural_value("filter").unwrap_or(0.0),
    )
}

pub fn resolve_label(
    state: &DialogState,
    label: &str,
    offer_filter: f64,
) -> Result<SystemAct, PolicyError> {
    let weakest = || {
        state
            .weakest_slot()
            .ok_or_else(|| PolicyError::Other("state has no slots".into()))
    };
    Ok(match label {
        "Welcome" => SystemAct::Welcome,
        "Repeat" => SystemAct::Repeat,
        "RequireMore" => SystemAct::RequireMore,
        "Request" => match &state.last_denied_slot {
            Some(slot) => SystemAct::Request { slot: slot.clone() },
            None => SystemAct::Request {
                slot: weakest()?.slot.clone(),
            },
        },
        "ExplicitConf" => {
            let slot = weakest()?;
            match slot.top() {
                Some((value, _)) => SystemAct::ExplicitConf {
                    slot: slot.slot.clone(),
                    value: value.to_string(),
                },
                None => SystemAct::Request {
                    slot: slot.slot.clone(),
                },
            }
        }
        "Offer" => SystemAct::Offer {
            constraints: state
                .slot_beliefs
                .iter()
                .filter_map(|b| {
                    b.top()
                        .filter(|(_, s)| *s > offer_filter)
                        .map(|(v, _)| (b.slot.clone(), v.to_string()))
                })
                .collect(),
        },
        other => return Err(PolicyError::UnsupportedAction(other.to_string())),
    })
}

/// How the channel error rate is chosen for each episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSchedule {
    Fixed(f64),
    /// Uniform choice among the listed error rates.
    Choice(Vec<f64>),
}

impl NoiseSchedule {
    /// Error rates 0.0, 0.1, ..., 0.6 with equal probability.
    pub fn mixed() -> Self {
        NoiseSchedule::Choice((0..=6).map(|i| i as f64 / 10.0).collect())
    }

    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        match self {
            NoiseSchedule::Fixed(e) => *e,
            NoiseSchedule::Choice(levels) => *levels.choose(rng).expect("validated non-empty"),
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        let levels: &[f64] = match self {
            NoiseSchedule::Fixed(e) => std::slice::from_ref(e),
            NoiseSchedule::Choice(v) if v.is_empty() => {
                return Err(SimError::Config("empty noise schedule".into()))
            }
            NoiseSchedule::Choice(v) => v,
        };
        if let Some(e) = levels.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(SimError::Config(format!("error rate {e} outside [0, 1]")));
        }
        Ok(())
    }
}

/// Everything about the simulated environment except the policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSetup {
    pub ontology: Ontology,
    /// Channel shape; the error rate is drawn from `schedule` per episode.
    pub noise: NoiseConfig,
    pub schedule: NoiseSchedule,
    pub rewards: RewardConfig,
    pub max_turns: usize,
    /// Consecutive `Repeat` turns the user tolerates before hanging up.
    pub patience: usize,
}

impl SimulationSetup {
    pub fn restaurant() -> Self {
        SimulationSetup {
            ontology: Ontology::restaurant(),
            noise: NoiseConfig::new(0.0),
            schedule: NoiseSchedule::mixed(),
            rewards: RewardConfig::simulation(),
            max_turns: 30,
            patience: 3,
        }
    }

    pub fn with_schedule(mut self, schedule: NoiseSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.noise.validate()?;
        self.schedule.validate()?;
        self.rewards
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))?;
        if self.max_turns == 0 || self.patience == 0 {
            return Err(SimError::Config(
                "max_turns and patience must be positive".into(),
            ));
        }
        Ok(())
    }
}
