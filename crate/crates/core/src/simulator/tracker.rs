use crate::dialog_core::{DialogState, NBestList, SystemAct, UserActType};

/// Folds one user turn into the dialog state.
///
/// Inform hypotheses raise each value's score to the maximum confidence seen;
/// a denial on top clears that slot; an affirmation of an explicit
/// confirmation pins the confirmed value to 1.0.
pub fn track(state: &mut DialogState, sys: &SystemAct, nbest: &NBestList) {
    state.slu_valid = !nbest.is_empty();
    state.top_slu_score = nbest.top().map_or(0.0, |h| h.confidence);
    state.last_denied_slot = None;

    for h in nbest.hypotheses() {
        if h.act.act != UserActType::Inform {
            continue;
        }
        for (slot, value) in &h.act.slot_values {
            if let Some(b) = state.belief_mut(slot) {
                let score = b.scores.entry(value.clone()).or_insert(0.0);
                *score = score.max(h.confidence);
            }
        }
    }

    let Some(top) = nbest.top() else { return };
    match top.act.act {
        UserActType::Deny => {
            if let Some((slot, _)) = top.act.slot_values.first() {
                if let Some(b) = state.belief_mut(slot) {
                    b.scores.clear();
                    state.last_denied_slot = Some(slot.clone());
                }
            }
        }
        UserActType::Affirm => {
            if let SystemAct::ExplicitConf { slot, value } = sys {
                if let Some(b) = state.belief_mut(slot) {
                    b.scores.insert(value.clone(), 1.0);
                }
            }
        }
        _ => {}
    }
}
