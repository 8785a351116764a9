use rand::Rng;
use rayon::prelude::*;

use super::{resolve_label, DialogPolicy, DialogSession, NoiseConfig, SimError, SimulationSetup};
use crate::corpus_io::{Corpus, CorpusHeader};
use crate::dialog_core::{feature_names, featurize, RewardConfig, Transition, SYSTEM_ACTIONS};
use crate::rng::stream;

/// Logs `dialogs` simulated dialogs as a corpus. On each turn, with
/// probability `epsilon`, the policy's action is replaced by a uniformly
/// random system action (offers then use every filled slot). Dialog `i` uses
/// the stream `(seed, i)`; `rewards` is recorded in the header.
pub fn collect_corpus(
    policy: &dyn DialogPolicy,
    setup: &SimulationSetup,
    dialogs: usize,
    epsilon: f64,
    rewards: RewardConfig,
    seed: u64,
) -> Result<Corpus, SimError> {
    setup.validate()?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(SimError::Config(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )));
    }
    let run = |i: usize| -> Result<Vec<Transition>, SimError> {
        let mut rng = stream(seed, &[i as u64]);
        let noise = NoiseConfig {
            error_rate: setup.schedule.sample(&mut rng),
            ..setup.noise
        };
        let mut session = DialogSession::new(setup, noise, &mut rng);
        let id = format!("sim-{i:06}");
        let mut out = Vec::new();
        loop {
            let turn = session.turn();
            let state = session.state();
            let sys = if rng.gen::<f64>() < epsilon {
                let label = SYSTEM_ACTIONS[rng.gen_range(0..SYSTEM_ACTIONS.len())];
                resolve_label(state, label, 0.0)
            } else {
                policy.act(state)
            }
            .map_err(|source| SimError::Policy { turn, source })?;
            let s = featurize(state);
            let step = session.step(&sys, &mut rng);
            out.push(Transition {
                dialog_id: id.clone(),
                turn,
                s,
                a: sys.label().to_string(),
                s_next: featurize(session.state()),
                terminal: step.outcome.is_some(),
            });
            if step.outcome.is_some() {
                return Ok(out);
            }
        }
    };
    let per_dialog: Vec<Vec<Transition>> = (0..dialogs)
        .into_par_iter()
        .map(run)
        .collect::<Result<_, _>>()?;
    let header = CorpusHeader::new(
        feature_names(&setup.ontology.slot_names()),
        SYSTEM_ACTIONS.iter().map(|s| s.to_string()).collect(),
        rewards,
    );
    Corpus::new(header, per_dialog.into_iter().flatten().collect())
        .map_err(|e| SimError::Config(e.to_string()))
}
