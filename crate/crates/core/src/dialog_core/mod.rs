//! Dialog acts, N-best lists, tracked dialog state, and rewards.

mod features;
mod reward;

pub use features::{feature_names, featurize, FEATURE_SCHEMA_VERSION};
pub use reward::{discounted_return, reward, OfferOutcome, RewardConfig};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// System action labels in canonical order.
pub const SYSTEM_ACTIONS: [&str; 6] = [
    "Welcome",
    "Repeat",
    "Request",
    "ExplicitConf",
    "RequireMore",
    "Offer",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DialogError {
    #[error("discount factor {0} outside (0, 1]")]
    InvalidGamma(f64),
    #[error("confidence {0} outside [0, 1]")]
    InvalidConfidence(f64),
    #[error("N-best confidences must be non-increasing")]
    UnorderedNBest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserActType {
    Inform,
    Deny,
    Affirm,
    Negate,
    Bye,
}

/// `act(slot=value, ...)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DialogAct {
    pub act: UserActType,
    pub slot_values: Vec<(String, String)>,
}

impl DialogAct {
    pub fn new(act: UserActType) -> Self {
        DialogAct {
            act,
            slot_values: Vec::new(),
        }
    }

    pub fn with(act: UserActType, slot: impl Into<String>, value: impl Into<String>) -> Self {
        DialogAct {
            act,
            slot_values: vec![(slot.into(), value.into())],
        }
    }
}

impl fmt::Display for DialogAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}(", self.act)?;
        for (i, (s, v)) in self.slot_values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}={v}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub act: DialogAct,
    pub confidence: f64,
}

/// Confidence-ordered SLU hypotheses; may be empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NBestList {
    hypotheses: Vec<Hypothesis>,
}

impl NBestList {
    pub fn new(hypotheses: Vec<Hypothesis>) -> Result<Self, DialogError> {
        if let Some(h) = hypotheses
            .iter()
            .find(|h| !(0.0..=1.0).contains(&h.confidence))
        {
            return Err(DialogError::InvalidConfidence(h.confidence));
        }
        if hypotheses
            .windows(2)
            .any(|w| w[0].confidence < w[1].confidence)
        {
            return Err(DialogError::UnorderedNBest);
        }
        Ok(NBestList { hypotheses })
    }

    pub fn empty() -> Self {
        NBestList::default()
    }

    pub fn top(&self) -> Option<&Hypothesis> {
        self.hypotheses.first()
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }
}

/// A system action with resolved slot-value content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "act")]
pub enum SystemAct {
    Welcome,
    Repeat,
    Request { slot: String },
    ExplicitConf { slot: String, value: String },
    RequireMore,
    Offer { constraints: Vec<(String, String)> },
}

impl SystemAct {
    pub fn label(&self) -> &'static str {
        match self {
            SystemAct::Welcome => "Welcome",
            SystemAct::Repeat => "Repeat",
            SystemAct::Request { .. } => "Request",
            SystemAct::ExplicitConf { .. } => "ExplicitConf",
            SystemAct::RequireMore => "RequireMore",
            SystemAct::Offer { .. } => "Offer",
        }
    }
}

/// Per-slot value scores, kept in ontology slot order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotBelief {
    pub slot: String,
    pub scores: BTreeMap<String, f64>,
}

impl SlotBelief {
    /// Highest-scoring value; ties go to the lexicographically first value.
    pub fn top(&self) -> Option<(&str, f64)> {
        let mut best: Option<(&str, f64)> = None;
        for (v, &s) in &self.scores {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((v, s));
            }
        }
        best
    }

    pub fn top_score(&self) -> f64 {
        self.top().map_or(0.0, |(_, s)| s)
    }

    pub fn second_score(&self) -> f64 {
        let mut scores: Vec<f64> = self.scores.values().copied().collect();
        scores.sort_by(|a, b| b.total_cmp(a));
        scores.get(1).copied().unwrap_or(0.0)
    }
}

/// Tracked dialog state: the input to policies and to featurization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogState {
    pub slot_beliefs: Vec<SlotBelief>,
    /// Confidence of the top SLU hypothesis of the latest user turn.
    pub top_slu_score: f64,
    /// False when the latest user turn produced an empty N-best list.
    pub slu_valid: bool,
    /// Set when the latest user turn denied a slot.
    pub last_denied_slot: Option<String>,
    pub require_more_issued: bool,
    pub offered_results: BTreeSet<String>,
    /// Outcome of the offer made in the turn that produced this state.
    pub last_offer: Option<OfferOutcome>,
    pub turn_index: usize,
    pub max_turns: usize,
}

impl DialogState {
    pub fn initial<S: AsRef<str>>(slots: &[S], max_turns: usize) -> Self {
        DialogState {
            slot_beliefs: slots
                .iter()
                .map(|s| SlotBelief {
                    slot: s.as_ref().to_string(),
                    scores: BTreeMap::new(),
                })
                .collect(),
            top_slu_score: 0.0,
            slu_valid: true,
            last_denied_slot: None,
            require_more_issued: false,
            offered_results: BTreeSet::new(),
            last_offer: None,
            turn_index: 0,
            max_turns,
        }
    }

    pub fn belief(&self, slot: &str) -> Option<&SlotBelief> {
        self.slot_beliefs.iter().find(|b| b.slot == slot)
    }

    pub fn belief_mut(&mut self, slot: &str) -> Option<&mut SlotBelief> {
        self.slot_beliefs.iter_mut().find(|b| b.slot == slot)
    }

    pub fn dialog_start(&self) -> bool {
        self.turn_index == 0
    }

    pub fn min_slot_score(&self) -> f64 {
        self.slot_beliefs
            .iter()
            .map(SlotBelief::top_score)
            .fold(f64::INFINITY, f64::min)
            .min(1.0)
    }

    /// Slot with the lowest top score (first in ontology order on ties).
    pub fn weakest_slot(&self) -> Option<&SlotBelief> {
        let mut best: Option<&SlotBelief> = None;
        for b in &self.slot_beliefs {
            if best.is_none_or(|w| b.top_score() < w.top_score()) {
                best = Some(b);
            }
        }
        best
    }

    pub fn filled_frac(&self) -> f64 {
        if self.slot_beliefs.is_empty() {
            return 0.0;
        }
        let filled = self
            .slot_beliefs
            .iter()
            .filter(|b| b.top_score() > 0.5)
            .count();
        filled as f64 / self.slot_beliefs.len() as f64
    }
}

/// One `(s, a, s')` step of a logged dialog, over feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub dialog_id: String,
    pub turn: usize,
    pub s: Vec<f64>,
    pub a: String,
    pub s_next: Vec<f64>,
    pub terminal: bool,
}
