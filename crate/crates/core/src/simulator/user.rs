//! Minimal agenda-based user.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Ontology;
use crate::dialog_core::{DialogAct, SystemAct, UserActType};
use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserGoal {
    pub constraints: Vec<(String, String)>,
    pub satisfied: bool,
}

impl UserGoal {
    pub fn sample(onto: &Ontology, rng: &mut RandomStream) -> Self {
        let constraints = onto
            .slots
            .iter()
            .map(|s| {
                (
                    s.name.clone(),
                    s.values.choose(rng).expect("non-empty vocabulary").clone(),
                )
            })
            .collect();
        UserGoal {
            constraints,
            satisfied: false,
        }
    }

    pub fn value(&self, slot: &str) -> Option<&str> {
        self.constraints
            .iter()
            .find(|(s, _)| s == slot)
            .map(|(_, v)| v.as_str())
    }

    /// First goal slot whose value differs in `offer`.
    pub fn first_mismatch<'o>(
        &self,
        offer: &'o [(String, String)],
    ) -> Option<&'o (String, String)> {
        offer
            .iter()
            .find(|(s, v)| self.value(s).is_some_and(|g| g != v))
    }
}

/// Pending user acts; the next act to utter is on top (end of the vector).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agenda {
    stack: Vec<DialogAct>,
}

impl Agenda {
    /// Informs for every goal slot in random order, with `bye` at the bottom.
    pub fn for_goal(goal: &UserGoal, rng: &mut RandomStream) -> Self {
        let mut informs: Vec<DialogAct> = goal
            .constraints
            .iter()
            .map(|(s, v)| DialogAct::with(UserActType::Inform, s, v))
            .collect();
        informs.shuffle(rng);
        let mut stack = vec![DialogAct::new(UserActType::Bye)];
        stack.extend(informs);
        Agenda { stack }
    }

    pub fn push(&mut self, act: DialogAct) {
        self.stack.push(act);
    }

    /// Pops the top act if it is an inform.
    pub fn pop_inform(&mut self) -> Option<DialogAct> {
        match self.stack.last() {
            Some(a) if a.act == UserActType::Inform => self.stack.pop(),
            _ => None,
        }
    }

    fn pop(&mut self) -> Option<DialogAct> {
        self.stack.pop()
    }

    /// Drops pending informs about `slot`.
    pub fn forget_slot(&mut self, slot: &str) {
        self.stack.retain(|a| {
            !(a.act == UserActType::Inform && a.slot_values.iter().any(|(s, _)| s == slot))
        });
    }

    pub fn len(&self) -> usize {
        self.stack.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stack.is_empty()
    }
}

/// What the user does in reaction to a system turn.
#[derive(Debug, Clone, PartialEq)]
pub enum UserTurn {
    Act(DialogAct),
    /// Goal satisfied by a correct offer.
    Bye,
    /// Patience exhausted.
    GiveUp,
}

#[derive(Debug, Clone)]
pub struct UserSimulator {
    pub goal: UserGoal,
    pub agenda: Agenda,
    pub patience: usize,
    consecutive_repeats: usize,
    last_act: Option<DialogAct>,
}

impl UserSimulator {
    pub fn new(onto: &Ontology, patience: usize, rng: &mut RandomStream) -> Self {
        let goal = UserGoal::sample(onto, rng);
        let agenda = Agenda::for_goal(&goal, rng);
        UserSimulator {
            goal,
            agenda,
            patience,
            consecutive_repeats: 0,
            last_act: None,
        }
    }

    fn next_inform_or_negate(&mut self) -> DialogAct {
        self.agenda
            .pop_inform()
            .unwrap_or_else(|| DialogAct::new(UserActType::Negate))
    }

    /// `offered` is the restaurant returned by the database for an offer.
    pub fn respond(&mut self, sys: &SystemAct, offered: Option<&[(String, String)]>) -> UserTurn {
        if matches!(sys, SystemAct::Repeat) {
            self.consecutive_repeats += 1;
            if self.consecutive_repeats >= self.patience {
                return UserTurn::GiveUp;
            }
            let act = match self.last_act.clone() {
                Some(a) => a,
                None => self.next_inform_or_negate(),
            };
            self.last_act = Some(act.clone());
            return UserTurn::Act(act);
        }
        self.consecutive_repeats = 0;

        let act = match sys {
            SystemAct::Welcome | SystemAct::RequireMore => self.next_inform_or_negate(),
            SystemAct::Request { slot } => match self.goal.value(slot).map(str::to_string) {
                Some(v) => {
                    self.agenda.forget_slot(slot);
                    self.agenda
                        .push(DialogAct::with(UserActType::Inform, slot.clone(), v));
                    self.agenda.pop().expect("just pushed")
                }
                None => DialogAct::new(UserActType::Negate),
            },
            SystemAct::ExplicitConf { slot, value } => {
                let reply = if self.goal.value(slot) == Some(value.as_str()) {
                    DialogAct::new(UserActType::Affirm)
                } else {
                    DialogAct::with(UserActType::Deny, slot.clone(), value.clone())
                };
                self.agenda.push(reply);
                self.agenda.pop().expect("just pushed")
            }
            SystemAct::Offer { .. } => {
                let offered = offered.unwrap_or(&[]);
                match self.goal.first_mismatch(offered) {
                    None => {
                        self.goal.satisfied = true;
                        return UserTurn::Bye;
                    }
                    Some((slot, value)) => {
                        DialogAct::with(UserActType::Deny, slot.clone(), value.clone())
                    }
                }
            }
            SystemAct::Repeat => unreachable!(),
        };
        self.last_act = Some(act.clone());
        UserTurn::Act(act)
    }
}
