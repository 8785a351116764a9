use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotDef {
    pub name: String,
    pub values: Vec<String>,
}

/// Constraint slots and their vocabularies. Every combination of values is a
/// restaurant in the simulated database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ontology {
    pub slots: Vec<SlotDef>,
}

const RESTAURANT: &str = include_str!("../../data/restaurant_ontology.toml");

impl Ontology {
    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let onto: Ontology = toml::from_str(text).map_err(|e| SimError::Ontology(e.to_string()))?;
        onto.validate()?;
        Ok(onto)
    }

    /// The shipped four-slot restaurant domain.
    pub fn restaurant() -> Self {
        Self::from_toml_str(RESTAURANT).expect("bundled ontology is valid")
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.slots.is_empty() {
            return Err(SimError::Ontology("no slots declared".into()));
        }
        let mut names = BTreeSet::new();
        for slot in &self.slots {
            if !names.insert(&slot.name) {
                return Err(SimError::Ontology(format!(
                    "slot `{}` declared twice",
                    slot.name
                )));
            }
            let distinct: BTreeSet<_> = slot.values.iter().collect();
            if distinct.len() < 2 || distinct.len() != slot.values.len() {
                return Err(SimError::Ontology(format!(
                    "slot `{}` needs at least two distinct values",
                    slot.name
                )));
            }
        }
        Ok(())
    }

    pub fn slot_names(&self) -> Vec<&str> {
        self.slots.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn values(&self, slot: &str) -> Option<&[String]> {
        self.slots
            .iter()
            .find(|s| s.name == slot)
            .map(|s| s.values.as_slice())
    }

    /// Identifier of a fully specified restaurant.
    pub fn result_id(values: &[(String, String)]) -> String {
        values
            .iter()
            .map(|(s, v)| format!("{s}={v}"))
            .collect::<Vec<_>>()
            .join("|")
    }

    /// First restaurant (in vocabulary order) that satisfies `constraints` and
    /// has not been offered yet; if all matches were offered, the first match.
    pub fn query(
        &self,
        constraints: &[(String, String)],
        offered: &BTreeSet<String>,
    ) -> Vec<(String, String)> {
        let fixed: Vec<Option<usize>> = self
            .slots
            .iter()
            .map(|slot| {
                constraints
                    .iter()
                    .find(|(s, _)| *s == slot.name)
                    .and_then(|(_, v)| slot.values.iter().position(|x| x == v))
            })
            .collect();
        let mut odometer: Vec<usize> = fixed.iter().map(|f| f.unwrap_or(0)).collect();
        let build = |odo: &[usize]| -> Vec<(String, String)> {
            self.slots
                .iter()
                .zip(odo)
                .map(|(s, &i)| (s.name.clone(), s.values[i].clone()))
                .collect()
        };
        let first = build(&odometer);
        loop {
            let candidate = build(&odometer);
            if !offered.contains(&Self::result_id(&candidate)) {
                return candidate;
            }
            // Advance the free slots, last slot fastest.
            let mut carry = true;
            for (i, slot) in self.slots.iter().enumerate().rev() {
                if !carry {
                    break;
                }
                if fixed[i].is_some() {
                    continue;
                }
                odometer[i] += 1;
                if odometer[i] == slot.values.len() {
                    odometer[i] = 0;
                } else {
                    carry = false;
                }
            }
            if carry {
                return first;
            }
        }
    }
}
