use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError};
use crate::rng::stream;

/// `rounds` independent dialog-level shuffles, each keeping `train_fraction`
/// of the dialogs (rounded down) for training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResamplePlan {
    pub rounds: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for ResamplePlan {
    fn default() -> Self {
        ResamplePlan {
            rounds: 12,
            train_fraction: 0.5,
            seed: 0,
        }
    }
}

impl ResamplePlan {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.rounds == 0 {
            return Err(CorpusError::InvalidPlan("rounds must be positive".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(CorpusError::InvalidPlan(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Train/test pairs; no dialog is split across the two halves. Dialogs keep
/// their original relative order inside each half.
pub fn resample_splits(
    corpus: &Corpus,
    plan: &ResamplePlan,
) -> Result<Vec<(Corpus, Corpus)>, CorpusError> {
    plan.validate()?;
    let dialogs = corpus.dialogs();
    let n = dialogs.len();
    let n_train = (n as f64 * plan.train_fraction).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(CorpusError::InvalidPlan(format!(
            "{n} dialogs cannot be split with train_fraction {}",
            plan.train_fraction
        )));
    }
    Ok((0..plan.rounds)
        .map(|round| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut stream(plan.seed, &[round as u64]));
            let (train, test) = order.split_at_mut(n_train);
            train.sort_unstable();
            test.sort_unstable();
            let pick = |idx: &[usize]| {
                let ds: Vec<_> = idx.iter().map(|&i| dialogs[i]).collect();
                Corpus::from_dialogs(corpus.header.clone(), &ds)
            };
            (pick(train), pick(test))
        })
        .collect())
}
