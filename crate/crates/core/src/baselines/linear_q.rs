use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::dialog_core::{
    feature_names, featurize, DialogState, SystemAct, FEATURE_SCHEMA_VERSION, SYSTEM_ACTIONS,
};
use crate::rng::{stream, RandomStream};
use crate::simulator::{
    resolve_label, DialogPolicy, DialogSession, NoiseConfig, PolicyError, SimulationSetup,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearQConfig {
    /// Initial step size, decayed as `learning_rate / sqrt(t)` over updates.
    pub learning_rate: f64,
    pub epsilon: f64,
    pub episodes: usize,
    pub gamma: f64,
}

impl Default for LinearQConfig {
    fn default() -> Self {
        LinearQConfig {
            learning_rate: 0.05,
            epsilon: 0.3,
            episodes: 100_000,
            gamma: 0.9,
        }
    }
}

impl LinearQConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(BaselineError::InvalidConfig(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(BaselineError::InvalidConfig(
                "learning_rate must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(BaselineError::InvalidConfig(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if self.episodes == 0 {
            return Err(BaselineError::InvalidConfig(
                "episodes must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub features: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

/// An episodic task seen through feature vectors and action indices.
pub trait Environment {
    fn feature_names(&self) -> Vec<String>;
    fn actions(&self) -> Vec<String>;
    fn reset(&mut self, rng: &mut RandomStream) -> Result<Vec<f64>, BaselineError>;
    fn step(&mut self, action: usize, rng: &mut RandomStream) -> Result<Step, BaselineError>;
}

/// The simulated restaurant user behind the [`SYSTEM_ACTIONS`] labels.
/// Offers use every filled slot.
pub struct SimEnvironment<'s> {
    setup: &'s SimulationSetup,
    session: Option<DialogSession<'s>>,
}

impl<'s> SimEnvironment<'s> {
    pub fn new(setup: &'s SimulationSetup) -> Self {
        SimEnvironment {
            setup,
            session: None,
        }
    }
}

impl Environment for SimEnvironment<'_> {
    fn feature_names(&self) -> Vec<String> {
        feature_names(&self.setup.ontology.slot_names())
    }

    fn actions(&self) -> Vec<String> {
        SYSTEM_ACTIONS.iter().map(|s| s.to_string()).collect()
    }

    fn reset(&mut self, rng: &mut RandomStream) -> Result<Vec<f64>, BaselineError> {
        let noise = NoiseConfig {
            error_rate: self.setup.schedule.sample(rng),
            ..self.setup.noise
        };
        let session = DialogSession::new(self.setup, noise, rng);
        let features = featurize(session.state());
        self.session = Some(session);
        Ok(features)
    }

    fn step(&mut self, action: usize, rng: &mut RandomStream) -> Result<Step, BaselineError> {
        let session = self
            .session
            .as_mut()
            .ok_or_else(|| BaselineError::Environment("step before reset".into()))?;
        if session.outcome().is_some() {
            return Err(BaselineError::Environment(
                "step after the dialog ended".into(),
            ));
        }
        let label = SYSTEM_ACTIONS
            .get(action)
            .ok_or_else(|| BaselineError::Environment(format!("action #{action}")))?;
        let sys = resolve_label(session.state(), label, 0.0)?;
        let out = session.step(&sys, rng);
        Ok(Step {
            features: featurize(session.state()),
            reward: out.reward,
            done: out.outcome.is_some(),
        })
    }
}

/// Greedy policy over per-action linear `Q(s, a) = w_a . s + b_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearQPolicy {
    pub schema_version: u32,
    pub feature_names: Vec<String>,
    pub actions: Vec<String>,
    /// One row per action: feature weights followed by the bias.
    pub weights: Vec<Vec<f64>>,
}

impl LinearQPolicy {
    fn zeros(feature_names: Vec<String>, actions: Vec<String>) -> Self {
        let weights = vec![vec![0.0; feature_names.len() + 1]; actions.len()];
        LinearQPolicy {
            schema_version: FEATURE_SCHEMA_VERSION,
            feature_names,
            actions,
            weights,
        }
    }

    pub fn q(&self, features: &[f64], action: usize) -> f64 {
        let w = &self.weights[action];
        let (bias, w) = w.split_last().expect("bias present");
        w.iter().zip(features).map(|(a, b)| a * b).sum::<f64>() + bias
    }

    pub fn q_values(&self, features: &[f64]) -> Vec<f64> {
        (0..self.actions.len())
            .map(|a| self.q(features, a))
            .collect()
    }

    /// Greedy action; ties go to the lowest index.
    pub fn greedy(&self, features: &[f64]) -> usize {
        let q = self.q_values(features);
        (0..q.len()).fold(0, |best, a| if q[a] > q[best] { a } else { best })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("weights serialize")
    }

    pub fn from_json(text: &str, expected_features: &[String]) -> Result<Self, BaselineError> {
        let p: LinearQPolicy =
            serde_json::from_str(text).map_err(|e| BaselineError::Serialization(e.to_string()))?;
        if p.schema_version != FEATURE_SCHEMA_VERSION || p.feature_names != expected_features {
            return Err(BaselineError::SchemaMismatch(format!(
                "weights for schema {} {:?}",
                p.schema_version, p.feature_names
            )));
        }
        if p.weights.len() != p.actions.len()
            || p.weights
                .iter()
                .any(|w| w.len() != p.feature_names.len() + 1)
        {
            return Err(BaselineError::Serialization(
                "weight matrix shape does not match the schema".into(),
            ));
        }
        Ok(p)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BaselineError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(
        path: impl AsRef<Path>,
        expected_features: &[String],
    ) -> Result<Self, BaselineError> {
        Self::from_json(&fs::read_to_string(path)?, expected_features)
    }
}

impl DialogPolicy for LinearQPolicy {
    fn act(&self, state: &DialogState) -> Result<SystemAct, PolicyError> {
        let a = self.greedy(&featurize(state));
        resolve_label(state, &self.actions[a], 0.0)
    }
}

/// Epsilon-greedy online Q-learning. Training is sequential; episode `i`
/// draws from the stream `(seed, i)`.
pub fn train_linear_q(
    env: &mut dyn Environment,
    cfg: &LinearQConfig,
    seed: u64,
) -> Result<LinearQPolicy, BaselineError> {
    cfg.validate()?;
    let mut policy = LinearQPolicy::zeros(env.feature_names(), env.actions());
    let n_actions = policy.actions.len();
    if n_actions == 0 {
        return Err(BaselineError::InvalidConfig(
            "environment has no actions".into(),
        ));
    }
    let mut updates = 0u64;
    for episode in 0..cfg.episodes {
        let mut rng = stream(seed, &[episode as u64]);
        let mut s = env.reset(&mut rng)?;
        loop {
            let a = if rng.gen::<f64>() < cfg.epsilon {
                rng.gen_range(0..n_actions)
            } else {
                policy.greedy(&s)
            };
            let step = env.step(a, &mut rng)?;
            let target = if step.done {
                step.reward
            } else {
                step.reward
                    + cfg.gamma
                        * policy
                            .q_values(&step.features)
                            .into_iter()
                            .fold(f64::NEG_INFINITY, f64::max)
            };
            updates += 1;
            let lr = cfg.learning_rate / (updates as f64).sqrt();
            let err = target - policy.q(&s, a);
            let w = &mut policy.weights[a];
            for (wi, xi) in w.iter_mut().zip(s.iter().chain(std::iter::once(&1.0))) {
                *wi += lr * err * xi;
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(BaselineError::DivergenceDetected { episode });
            }
            if step.done {
                break;
            }
            s = step.features;
        }
    }
    Ok(policy)
}
