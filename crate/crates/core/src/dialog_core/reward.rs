use serde::{Deserialize, Serialize};

use super::DialogError;
use crate::policy_dsl::StateView;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OfferOutcome {
    Correct,
    Duplicate,
    Wrong,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub per_turn: f64,
    pub correct_offer: f64,
    pub duplicate_offer: f64,
    pub wrong_offer: f64,
    pub gamma: f64,
}

impl RewardConfig {
    /// Simulated restaurant domain.
    pub fn simulation() -> Self {
        RewardConfig {
            per_turn: -1.0,
            correct_offer: 100.0,
            duplicate_offer: -5.0,
            wrong_offer: -5.0,
            gamma: 0.9,
        }
    }

    /// Corpus setting: harsher turn cost and offer penalties.
    pub fn corpus() -> Self {
        RewardConfig {
            per_turn: -10.0,
            correct_offer: 100.0,
            duplicate_offer: -50.0,
            wrong_offer: -100.0,
            gamma: 0.9,
        }
    }

    pub fn validate(&self) -> Result<(), DialogError> {
        if self.gamma > 0.0 && self.gamma <= 1.0 {
            Ok(())
        } else {
            Err(DialogError::InvalidGamma(self.gamma))
        }
    }

    pub fn offer_bonus(&self, outcome: OfferOutcome) -> f64 {
        match outcome {
            OfferOutcome::Correct => self.correct_offer,
            OfferOutcome::Duplicate => self.duplicate_offer,
            OfferOutcome::Wrong => self.wrong_offer,
        }
    }
}

/// Per-turn reward plus the bonus or penalty of an offer made on this turn.
///
/// The offer outcome is read from the `offer_*` flags of `s_next`, so the same
/// function scores tracked states and stored feature vectors.
pub fn reward(_s: &impl StateView, a: &str, s_next: &impl StateView, cfg: &RewardConfig) -> f64 {
    let mut r = cfg.per_turn;
    if a == "Offer" {
        let set = |name| s_next.lookup(name).is_some_and(|v| v > 0.5);
        if set("offer_correct") {
            r += cfg.correct_offer;
        } else if set("offer_duplicate") {
            r += cfg.duplicate_offer;
        } else if set("offer_wrong") {
            r += cfg.wrong_offer;
        }
    }
    r
}

/// `sum_j gamma^(j-1) r_j`.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut discount = 1.0;
    let mut total = 0.0;
    for r in rewards {
        total += discount * r;
        discount *= gamma;
    }
    total
}
