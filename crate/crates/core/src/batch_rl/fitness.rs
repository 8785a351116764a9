use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::models::{ActionClassifier, QModel};
use super::{argmax, BatchError, CorpusPolicy};
use crate::evolution::{FitnessError, FitnessFunction};
use crate::policy_dsl::{evaluate_policy, ParameterVector, TemplateAst};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QValConfig {
    /// Minimum classifier probability for an action's Q value to count.
    pub delta: f64,
    /// Value charged for actions below the threshold.
    pub r_punish: f64,
}

impl Default for QValConfig {
    fn default() -> Self {
        QValConfig {
            delta: 0.1,
            r_punish: -100.0,
        }
    }
}

impl QValConfig {
    pub fn validate(&self) -> Result<(), BatchError> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(BatchError::InvalidConfig(format!(
                "delta must lie in [0, 1], got {}",
                self.delta
            )));
        }
        if !self.r_punish.is_finite() {
            return Err(BatchError::InvalidConfig("r_punish must be finite".into()));
        }
        Ok(())
    }

    fn value(&self, q: f64, p: f64) -> f64 {
        if p > self.delta {
            q
        } else {
            self.r_punish
        }
    }
}

/// A template with fixed parameters, run on named corpus feature vectors.
pub struct TemplateCorpusPolicy<'a> {
    ast: &'a TemplateAst,
    params: ParameterVector,
    feature_names: &'a [String],
    actions: &'a [String],
}

impl<'a> TemplateCorpusPolicy<'a> {
    pub fn new(
        ast: &'a TemplateAst,
        params: ParameterVector,
        feature_names: &'a [String],
        actions: &'a [String],
    ) -> Result<Self, BatchError> {
        if ast.has_structural_params() {
            return Err(BatchError::StructuralParamForbidden);
        }
        if params.len() != ast.param_count {
            return Err(crate::policy_dsl::DslError::ArityMismatch {
                expected: ast.param_count,
                got: params.len(),
            }
            .into());
        }
        Ok(TemplateCorpusPolicy {
            ast,
            params,
            feature_names,
            actions,
        })
    }

    /// Action label chosen in `state`.
    pub fn label(&self, state: &[f64]) -> Result<&'a str, BatchError> {
        Ok(evaluate_policy(self.ast, &self.params, &(self.feature_names, state))?.act)
    }

    /// Like [`CorpusPolicy::choose`], but `None` for labels outside the action set.
    pub fn index(&self, state: &[f64]) -> Result<Option<usize>, BatchError> {
        let label = self.label(state)?;
        Ok(self.actions.iter().position(|a| a == label))
    }
}

impl CorpusPolicy for TemplateCorpusPolicy<'_> {
    fn choose(&self, state: &[f64]) -> Result<usize, BatchError> {
        let label = self.label(state)?;
        self.actions
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| BatchError::UnknownAction(label.to_string()))
    }
}

/// Number of states where the template agrees with the greedy action of `q`.
pub fn fitness_npoints(
    ast: &TemplateAst,
    params: &ParameterVector,
    states: &[&[f64]],
    q: &QModel,
) -> Result<f64, BatchError> {
    let policy = TemplateCorpusPolicy::new(ast, params.clone(), q.feature_names(), q.actions())?;
    let mut hits = 0usize;
    for s in states {
        if policy.index(s)? == Some(q.greedy(s)) {
            hits += 1;
        }
    }
    Ok(hits as f64)
}

/// Sum over states of `Q(s, a)` for the template's action `a`, or `r_punish`
/// where the classifier gives `a` probability at most `delta` (or `a` is not
/// a known action).
pub fn fitness_qval(
    ast: &TemplateAst,
    params: &ParameterVector,
    states: &[&[f64]],
    q: &QModel,
    clf: &ActionClassifier,
    cfg: &QValConfig,
) -> Result<f64, BatchError> {
    cfg.validate()?;
    let policy = TemplateCorpusPolicy::new(ast, params.clone(), q.feature_names(), q.actions())?;
    let mut total = 0.0;
    for s in states {
        total += match policy.index(s)? {
            Some(a) => cfg.value(q.q(s, a), clf.proba(s)[a]),
            None => cfg.r_punish,
        };
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorpusFitnessKind {
    NPoints,
    QVal(QValConfig),
}

/// GA fitness over a fixed set of corpus states. Model outputs are computed
/// once up front, so each evaluation only runs the template.
pub struct CorpusFitness<'a> {
    ast: &'a TemplateAst,
    feature_names: Vec<String>,
    actions: Vec<String>,
    states: Vec<Vec<f64>>,
    /// Per state: the value credited for each action.
    credit: Vec<Vec<f64>>,
    miss: f64,
}

impl<'a> CorpusFitness<'a> {
    pub fn new(
        ast: &'a TemplateAst,
        states: &[&[f64]],
        q: &QModel,
        clf: Option<&ActionClassifier>,
        kind: CorpusFitnessKind,
    ) -> Result<Self, BatchError> {
        if ast.has_structural_params() {
            return Err(BatchError::StructuralParamForbidden);
        }
        let (credit, miss) = match kind {
            CorpusFitnessKind::NPoints => {
                let credit = states
                    .par_iter()
                    .map(|s| {
                        let best = argmax(&q.q_values(s));
                        (0..q.actions().len())
                            .map(|a| if a == best { 1.0 } else { 0.0 })
                            .collect()
                    })
                    .collect();
                (credit, 0.0)
            }
            CorpusFitnessKind::QVal(cfg) => {
                cfg.validate()?;
                let clf = clf.ok_or_else(|| {
                    BatchError::InvalidConfig("QVal fitness needs a classifier".into())
                })?;
                let credit = states
                    .par_iter()
                    .map(|s| {
                        let p = clf.proba(s);
                        q.q_values(s)
                            .iter()
                            .zip(&p)
                            .map(|(&qv, &pv)| cfg.value(qv, pv))
                            .collect()
                    })
                    .collect();
                (credit, cfg.r_punish)
            }
        };
        Ok(CorpusFitness {
            ast,
            feature_names: q.feature_names().to_vec(),
            actions: q.actions().to_vec(),
            states: states.iter().map(|s| s.to_vec()).collect(),
            credit,
            miss,
        })
    }

    pub fn score(&self, params: &ParameterVector) -> Result<f64, BatchError> {
        let policy = TemplateCorpusPolicy::new(
            self.ast,
            params.clone(),
            &self.feature_names,
            &self.actions,
        )?;
        let mut total = 0.0;
        for (s, credit) in self.states.iter().zip(&self.credit) {
            total += match policy.index(s)? {
                Some(a) => credit[a],
                None => self.miss,
            };
        }
        Ok(total)
    }
}

impl FitnessFunction for CorpusFitness<'_> {
    fn genome_len(&self) -> usize {
        self.ast.param_count
    }

    fn evaluate(&self, genome: &[f64], _rng: &mut RandomStream) -> Result<f64, FitnessError> {
        Ok(self.score(&ParameterVector::new(genome.to_vec())?)?)
    }
}
