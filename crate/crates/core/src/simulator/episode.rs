use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    corrupt, track, DialogPolicy, NoiseConfig, Ontology, SimError, SimulationSetup, TemplatePolicy,
    UserSimulator, UserTurn,
};
use crate::dialog_core::{
    discounted_return, feature_names, featurize, reward, DialogAct, DialogState, NBestList,
    OfferOutcome, SystemAct, Transition,
};
use crate::evolution::{FitnessError, FitnessFunction};
use crate::policy_dsl::{ParameterVector, TemplateAst};
use crate::rng::{stream, RandomStream};
use crate::stats::mean_std;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpisodeOutcome {
    Success,
    Failure,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub state: DialogState,
    pub action: SystemAct,
    /// The true user act; absent when the user ended the dialog.
    pub user_act: Option<DialogAct>,
    pub nbest: NBestList,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub error_rate: f64,
    pub turns: Vec<TurnRecord>,
    pub final_state: DialogState,
    pub outcome: EpisodeOutcome,
    pub discounted_return: f64,
}

impl EpisodeLog {
    pub fn rewards(&self) -> Vec<f64> {
        self.turns.iter().map(|t| t.reward).collect()
    }

    /// `(s, a, s')` triplets over the dialog feature layout; the last one is
    /// terminal.
    pub fn to_transitions(&self, dialog_id: &str) -> Vec<Transition> {
        let n = self.turns.len();
        (0..n)
            .map(|i| {
                let next = if i + 1 < n {
                    &self.turns[i + 1].state
                } else {
                    &self.final_state
                };
                Transition {
                    dialog_id: dialog_id.to_string(),
                    turn: i,
                    s: featurize(&self.turns[i].state),
                    a: self.turns[i].action.label().to_string(),
                    s_next: featurize(next),
                    terminal: i + 1 == n,
                }
            })
            .collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        let slots: Vec<&str> = self
            .final_state
            .slot_beliefs
            .iter()
            .map(|b| b.slot.as_str())
            .collect();
        feature_names(&slots)
    }
}

/// Result of one dialog without the per-turn log.
#[derive(Debug, Clone, Copy, PartialEq)]
struct EpisodeSummary {
    discounted_return: f64,
    turns: usize,
    outcome: EpisodeOutcome,
}

fn offer_outcome(
    onto: &Ontology,
    user: &UserSimulator,
    constraints: &[(String, String)],
    state: &DialogState,
) -> (Vec<(String, String)>, String, OfferOutcome) {
    let result = onto.query(constraints, &state.offered_results);
    let id = Ontology::result_id(&result);
    let outcome = if user.goal.first_mismatch(&result).is_none() {
        OfferOutcome::Correct
    } else if state.offered_results.contains(&id) {
        OfferOutcome::Duplicate
    } else {
        OfferOutcome::Wrong
    };
    (result, id, outcome)
}

/// What one system turn produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionStep {
    pub reward: f64,
    /// The true user act; absent when the user ended the dialog.
    pub user_act: Option<DialogAct>,
    pub nbest: NBestList,
    /// Set once the dialog is over, including by the turn limit.
    pub outcome: Option<EpisodeOutcome>,
}

/// A dialog in progress, advanced one system act at a time.
pub struct DialogSession<'s> {
    setup: &'s SimulationSetup,
    noise: NoiseConfig,
    user: UserSimulator,
    state: DialogState,
    turn: usize,
    outcome: Option<EpisodeOutcome>,
}

impl<'s> DialogSession<'s> {
    pub fn new(setup: &'s SimulationSetup, noise: NoiseConfig, rng: &mut RandomStream) -> Self {
        let onto = &setup.ontology;
        let user = UserSimulator::new(onto, setup.patience, rng);
        let state = DialogState::initial(&onto.slot_names(), setup.max_turns);
        DialogSession {
            setup,
            noise,
            user,
            state,
            turn: 0,
            outcome: None,
        }
    }

    pub fn state(&self) -> &DialogState {
        &self.state
    }

    pub fn turn(&self) -> usize {
        self.turn
    }

    pub fn outcome(&self) -> Option<EpisodeOutcome> {
        self.outcome
    }

    /// Plays `sys` and moves to the next state.
    ///
    /// # Panics
    /// If the dialog has already ended.
    pub fn step(&mut self, sys: &SystemAct, rng: &mut RandomStream) -> SessionStep {
        assert!(self.outcome.is_none(), "dialog already ended");
        let onto = &self.setup.ontology;
        let mut next = self.state.clone();
        next.turn_index += 1;
        next.last_offer = None;

        let mut offered = None;
        match sys {
            SystemAct::Offer { constraints } => {
                let (result, id, outcome) =
                    offer_outcome(onto, &self.user, constraints, &self.state);
                next.offered_results.insert(id);
                next.last_offer = Some(outcome);
                offered = Some(result);
            }
            SystemAct::RequireMore => next.require_more_issued = true,
            _ => {}
        }

        let (user_act, nbest, ended) = match self.user.respond(sys, offered.as_deref()) {
            UserTurn::Act(act) => {
                let nbest = corrupt(&act, onto, &self.noise, rng);
                track(&mut next, sys, &nbest);
                (Some(act), nbest, None)
            }
            UserTurn::Bye => (None, NBestList::empty(), Some(EpisodeOutcome::Success)),
            UserTurn::GiveUp => (None, NBestList::empty(), Some(EpisodeOutcome::Failure)),
        };

        let r = reward(&self.state, sys.label(), &next, &self.setup.rewards);
        self.turn += 1;
        self.outcome =
            ended.or((self.turn == self.setup.max_turns).then_some(EpisodeOutcome::Timeout));
        self.state = next;
        SessionStep {
            reward: r,
            user_act,
            nbest,
            outcome: self.outcome,
        }
    }
}

fn play(
    policy: &dyn DialogPolicy,
    setup: &SimulationSetup,
    noise: &NoiseConfig,
    rng: &mut RandomStream,
    mut log: Option<&mut Vec<TurnRecord>>,
) -> Result<(EpisodeSummary, DialogState), SimError> {
    let mut session = DialogSession::new(setup, *noise, rng);
    let gamma = setup.rewards.gamma;
    let (mut total, mut discount) = (0.0, 1.0);
    loop {
        let turn = session.turn();
        let sys = policy
            .act(session.state())
            .map_err(|source| SimError::Policy { turn, source })?;
        let before = log.is_some().then(|| session.state().clone());
        let step = session.step(&sys, rng);
        total += discount * step.reward;
        discount *= gamma;
        if let (Some(log), Some(state)) = (log.as_deref_mut(), before) {
            log.push(TurnRecord {
                state,
                action: sys,
                user_act: step.user_act,
                nbest: step.nbest,
                reward: step.reward,
            });
        }
        if let Some(outcome) = step.outcome {
            let summary = EpisodeSummary {
                discounted_return: total,
                turns: turn + 1,
                outcome,
            };
            return Ok((summary, session.state));
        }
    }
}

/// Runs one dialog between `policy` and a fresh simulated user.
pub fn run_episode(
    policy: &dyn DialogPolicy,
    setup: &SimulationSetup,
    noise: &NoiseConfig,
    rng: &mut RandomStream,
) -> Result<EpisodeLog, SimError> {
    let mut turns = Vec::new();
    let (summary, final_state) = play(policy, setup, noise, rng, Some(&mut turns))?;
    let discounted = discounted_return(
        &turns.iter().map(|t| t.reward).collect::<Vec<_>>(),
        setup.rewards.gamma,
    );
    debug_assert!((discounted - summary.discounted_return).abs() < 1e-9);
    Ok(EpisodeLog {
        error_rate: noise.error_rate,
        turns,
        final_state,
        outcome: summary.outcome,
        discounted_return: discounted,
    })
}

/// Aggregate behaviour of a policy over many simulated dialogs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub episodes: usize,
    pub mean_return: f64,
    pub std_return: f64,
    pub mean_turns: f64,
    pub success_rate: f64,
}

/// Plays `n_episodes` dialogs; episode `i` uses the stream `(seed, i)` and
/// draws its error rate from the setup's schedule.
pub fn simulate_policy(
    policy: &dyn DialogPolicy,
    setup: &SimulationSetup,
    n_episodes: usize,
    seed: u64,
) -> Result<SimulationSummary, SimError> {
    if n_episodes == 0 {
        return Err(SimError::Config("n_episodes must be at least 1".into()));
    }
    setup.validate()?;
    let run = |i: usize| {
        let mut rng = stream(seed, &[i as u64]);
        let noise = NoiseConfig {
            error_rate: setup.schedule.sample(&mut rng),
            ..setup.noise
        };
        play(policy, setup, &noise, &mut rng, None).map(|(s, _)| s)
    };
    let results: Vec<EpisodeSummary> = (0..n_episodes)
        .into_par_iter()
        .map(run)
        .collect::<Result<_, _>>()?;
    let returns: Vec<f64> = results.iter().map(|r| r.discounted_return).collect();
    let (mean_return, std_return) = mean_std(&returns);
    let n = n_episodes as f64;
    Ok(SimulationSummary {
        episodes: n_episodes,
        mean_return,
        std_return,
        mean_turns: results.iter().map(|r| r.turns as f64).sum::<f64>() / n,
        success_rate: results
            .iter()
            .filter(|r| r.outcome == EpisodeOutcome::Success)
            .count() as f64
            / n,
    })
}

/// Mean discounted return of a template instantiation over `n_episodes`.
pub fn fitness_simulation(
    ast: &TemplateAst,
    params: &ParameterVector,
    n_episodes: usize,
    setup: &SimulationSetup,
    seed: u64,
) -> Result<f64, SimError> {
    let policy = TemplatePolicy::new(ast, params.clone()).map_err(|e| SimError::Policy {
        turn: 0,
        source: e.into(),
    })?;
    Ok(simulate_policy(&policy, setup, n_episodes, seed)?.mean_return)
}

/// Simulation fitness as a GA objective. Each evaluation draws its episode
/// seed from the stream the GA provides.
#[derive(Debug, Clone)]
pub struct SimulationFitness<'a> {
    pub ast: &'a TemplateAst,
    pub setup: &'a SimulationSetup,
    pub n_episodes: usize,
}

impl FitnessFunction for SimulationFitness<'_> {
    fn genome_len(&self) -> usize {
        self.ast.param_count
    }

    fn evaluate(&self, genome: &[f64], rng: &mut RandomStream) -> Result<f64, FitnessError> {
        let params = ParameterVector::new(genome.to_vec())?;
        Ok(fitness_simulation(
            self.ast,
            &params,
            self.n_episodes,
            self.setup,
            rng.gen(),
        )?)
    }
}
