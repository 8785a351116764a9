use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::models::{logged_pairs, QModel};
use super::trees::{ExtraTrees, ForestConfig};
use super::{BatchError, CorpusPolicy, RewardModel};
use crate::corpus_io::{Corpus, CorpusError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FittedQConfig {
    pub l_max: usize,
    pub gamma: f64,
    pub trees: usize,
    /// `None` means `round(sqrt(d))`.
    pub k_features: Option<usize>,
    pub n_min: usize,
    pub seed: u64,
}

impl Default for FittedQConfig {
    fn default() -> Self {
        FittedQConfig {
            l_max: 50,
            gamma: 0.9,
            trees: 100,
            k_features: None,
            n_min: 5,
            seed: 0,
        }
    }
}

impl FittedQConfig {
    pub fn validate(&self) -> Result<(), BatchError> {
        if self.l_max == 0 {
            return Err(BatchError::InvalidConfig("l_max must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(BatchError::InvalidConfig(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        self.forest().validate()
    }

    pub fn forest(&self) -> ForestConfig {
        ForestConfig {
            n_trees: self.trees,
            k_features: self.k_features,
            n_min: self.n_min,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FittedQOutput {
    pub model: QModel,
    /// Final Q targets, aligned with the corpus transitions.
    pub targets: Vec<f64>,
    /// Max-norm change of the target array at each iteration.
    pub residuals: Vec<f64>,
}

fn check_episodes(corpus: &Corpus) -> Result<(), BatchError> {
    if corpus.transitions.is_empty() {
        return Err(BatchError::EmptyTrainingSet);
    }
    corpus.validate().map_err(|e| match e {
        CorpusError::MissingTerminal(id) => BatchError::MalformedEpisode {
            dialog_id: id,
            message: "no terminal transition".into(),
        },
        CorpusError::MalformedDialog { dialog_id, message } => {
            BatchError::MalformedEpisode { dialog_id, message }
        }
        CorpusError::SchemaMismatch { message, .. } => BatchError::SchemaMismatch(message),
        other => BatchError::InvalidConfig(other.to_string()),
    })
}

/// Shared target loop: `next_value` supplies the bootstrap term for a
/// non-terminal transition given the current model.
fn iterate(
    corpus: &Corpus,
    rewards: &dyn RewardModel,
    cfg: &FittedQConfig,
    next_value: impl Fn(&QModel, usize) -> f64 + Sync,
) -> Result<FittedQOutput, BatchError> {
    cfg.validate()?;
    check_episodes(corpus)?;
    let header = &corpus.header;
    let (states, actions) = logged_pairs(corpus)?;
    let x = QModel::design_matrix(
        header.feature_names.len(),
        header.action_set.len(),
        &states,
        &actions,
    )?;
    let d = header.feature_names.len() + header.action_set.len();
    let r: Vec<f64> = corpus
        .transitions
        .iter()
        .map(|t| rewards.reward(&t.s, &t.a, &t.s_next))
        .collect();
    if r.iter().any(|v| !v.is_finite()) {
        return Err(BatchError::NonFinite("rewards".into()));
    }

    let forest_cfg = cfg.forest();
    let mut targets = vec![0.0; r.len()];
    let mut model: Option<QModel> = None;
    let mut residuals = Vec::with_capacity(cfg.l_max);
    for _ in 0..cfg.l_max {
        let next: Vec<f64> = corpus
            .transitions
            .par_iter()
            .enumerate()
            .map(|(i, t)| {
                if t.terminal {
                    r[i]
                } else {
                    r[i] + cfg.gamma * model.as_ref().map_or(0.0, |m| next_value(m, i))
                }
            })
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(BatchError::NonFinite("Q targets".into()));
        }
        residuals.push(
            next.iter()
                .zip(&targets)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
        targets = next;
        let forest = ExtraTrees::fit(&x, d, &targets, 1, &forest_cfg)?;
        model = Some(QModel::from_forest(
            forest,
            &header.feature_names,
            &header.action_set,
        ));
    }
    Ok(FittedQOutput {
        model: model.expect("l_max >= 1"),
        targets,
        residuals,
    })
}

/// Episodic fitted Q-iteration. Terminal transitions target their immediate
/// reward; the rest bootstrap on `max_a Q(s', a)` of the previous fit. The
/// regressor is refit from scratch each iteration with the same seed.
pub fn fitted_q_iteration(
    corpus: &Corpus,
    rewards: &dyn RewardModel,
    cfg: &FittedQConfig,
) -> Result<FittedQOutput, BatchError> {
    iterate(corpus, rewards, cfg, |m, i| {
        m.max_q(&corpus.transitions[i].s_next)
    })
}

/// Off-policy value of `policy`: fitted Q-iteration with the bootstrap term
/// `Q(s', policy(s'))`, averaged over the first-turn targets.
pub fn evaluate_policy_on_corpus(
    policy: &dyn CorpusPolicy,
    corpus: &Corpus,
    rewards: &dyn RewardModel,
    cfg: &FittedQConfig,
) -> Result<f64, BatchError> {
    let n_actions = corpus.header.action_set.len();
    let chosen: Vec<usize> = corpus
        .transitions
        .par_iter()
        .map(|t| {
            if t.terminal {
                return Ok(0);
            }
            let a = policy.choose(&t.s_next)?;
            if a >= n_actions {
                return Err(BatchError::UnknownAction(format!("#{a}")));
            }
            Ok(a)
        })
        .collect::<Result<_, _>>()?;
    let out = iterate(corpus, rewards, cfg, |m, i| {
        m.q(&corpus.transitions[i].s_next, chosen[i])
    })?;
    let starts: Vec<f64> = corpus
        .transitions
        .iter()
        .zip(&out.targets)
        .filter(|(t, _)| t.turn == 0)
        .map(|(_, &q)| q)
        .collect();
    Ok(starts.iter().sum::<f64>() / starts.len() as f64)
}
