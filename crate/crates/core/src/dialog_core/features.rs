//! Fixed-layout feature vectors for regression and corpus storage.
//!
//! Layout (version 1), for ontology slots `s1..sn`:
//!
//! | features | meaning |
//! |---|---|
//! | `top_<s>` | top value score of each slot |
//! | `second_<s>` | second value score of each slot |
//! | `filled_frac` | fraction of slots whose top score exceeds 0.5 |
//! | `top_slu_score` | confidence of the latest top SLU hypothesis |
//! | `min_slot_score` | lowest top score over slots |
//! | `dialog_start`, `no_slu`, `user_denied`, `require_more_pending` | booleans as 0/1 |
//! | `offer_correct`, `offer_duplicate`, `offer_wrong` | outcome of the offer that produced the state |
//! | `turn_frac` | turn index divided by the turn limit |
//!
//! Names double as template state variables: a feature vector plus its
//! names is a [`StateView`].

use super::{DialogState, OfferOutcome};
use crate::policy_dsl::StateView;

pub const FEATURE_SCHEMA_VERSION: u32 = 1;

const FLAGS: [&str; 4] = [
    "dialog_start",
    "no_slu",
    "user_denied",
    "require_more_pending",
];
const OFFER: [&str; 3] = ["offer_correct", "offer_duplicate", "offer_wrong"];

pub fn feature_names<S: AsRef<str>>(slots: &[S]) -> Vec<String> {
    let mut names = Vec::with_capacity(2 * slots.len() + 12);
    names.extend(slots.iter().map(|s| format!("top_{}", s.as_ref())));
    names.extend(slots.iter().map(|s| format!("second_{}", s.as_ref())));
    names.extend(["filled_frac", "top_slu_score", "min_slot_score"].map(String::from));
    names.extend(FLAGS.map(String::from));
    names.extend(OFFER.map(String::from));
    names.push("turn_frac".into());
    names
}

pub fn featurize(state: &DialogState) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * state.slot_beliefs.len() + 12);
    out.extend(state.slot_beliefs.iter().map(|b| b.top_score()));
    out.extend(state.slot_beliefs.iter().map(|b| b.second_score()));
    out.extend([
        state.filled_frac(),
        state.top_slu_score,
        state.min_slot_score(),
    ]);
    out.extend(FLAGS.iter().map(|f| state.lookup(f).expect("flag")));
    out.extend(OFFER.iter().map(|f| state.lookup(f).expect("offer flag")));
    out.push(state.lookup("turn_frac").expect("turn_frac"));
    out
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl StateView for DialogState {
    fn lookup(&self, name: &str) -> Option<f64> {
        Some(match name {
            "dialog_start" => flag(self.dialog_start()),
            "no_slu" => flag(!self.slu_valid),
            "user_denied" => flag(self.last_denied_slot.is_some()),
            "require_more_pending" => flag(!self.require_more_issued),
            "top_slu_score" => self.top_slu_score,
            "min_slot_score" => self.min_slot_score(),
            "filled_frac" => self.filled_frac(),
            "offer_correct" => flag(self.last_offer == Some(OfferOutcome::Correct)),
            "offer_duplicate" => flag(self.last_offer == Some(OfferOutcome::Duplicate)),
            "offer_wrong" => flag(self.last_offer == Some(OfferOutcome::Wrong)),
            "turn_frac" => self.turn_index as f64 / self.max_turns.max(1) as f64,
            other => {
                if let Some(slot) = other.strip_prefix("top_") {
                    self.belief(slot)?.top_score()
                } else if let Some(slot) = other.strip_prefix("second_") {
                    self.belief(slot)?.second_score()
                } else {
                    return None;
                }
            }
        })
    }
}
