//! Act-level SLU noise channel.
//!
//! With probability `error_rate` the top hypothesis is corrupted: every
//! slot-value pair is either replaced by another vocabulary value or deleted
//! (even odds). An act left without content, or a valueless act that gets
//! corrupted, yields an empty N-best list. Lower-ranked entries are value
//! confusions, plus the true act when the top entry is wrong. Correct
//! hypotheses draw confidences from `Beta(5, 2)`, incorrect ones from
//! `Beta(2, 5)`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::{Ontology, SimError};
use crate::dialog_core::{DialogAct, Hypothesis, NBestList};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfidenceModel {
    pub correct: (f64, f64),
    pub incorrect: (f64, f64),
}

impl Default for ConfidenceModel {
    fn default() -> Self {
        ConfidenceModel {
            correct: (5.0, 2.0),
            incorrect: (2.0, 5.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub error_rate: f64,
    pub nbest_size: usize,
    #[serde(default)]
    pub confidence: ConfidenceModel,
}

impl NoiseConfig {
    pub fn new(error_rate: f64) -> Self {
        NoiseConfig {
            error_rate,
            nbest_size: 3,
            confidence: ConfidenceModel::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&self.error_rate) {
            return Err(SimError::Config(format!(
                "error_rate {} outside [0, 1]",
                self.error_rate
            )));
        }
        if self.nbest_size == 0 {
            return Err(SimError::Config("nbest_size must be at least 1".into()));
        }
        let ok = |(a, b): (f64, f64)| a > 0.0 && b > 0.0;
        if !ok(self.confidence.correct) || !ok(self.confidence.incorrect) {
            return Err(SimError::Config("Beta parameters must be positive".into()));
        }
        Ok(())
    }
}

fn other_value<'o>(
    onto: &'o Ontology,
    slot: &str,
    truth: &str,
    rng: &mut RandomStream,
) -> Option<&'o String> {
    let vocab = onto.values(slot)?;
    let alternatives: Vec<&String> = vocab.iter().filter(|v| *v != truth).collect();
    alternatives.choose(rng).copied()
}

/// Corrupted copy of `act`; `None` when nothing recognizable remains.
fn distort(
    act: &DialogAct,
    onto: &Ontology,
    allow_delete: bool,
    rng: &mut RandomStream,
) -> Option<DialogAct> {
    if act.slot_values.is_empty() {
        return None;
    }
    let mut slot_values = Vec::with_capacity(act.slot_values.len());
    for (slot, value) in &act.slot_values {
        if allow_delete && rng.gen::<bool>() {
            continue;
        }
        match other_value(onto, slot, value, rng) {
            Some(v) => slot_values.push((slot.clone(), v.clone())),
            None => continue,
        }
    }
    if slot_values.is_empty() {
        None
    } else {
        Some(DialogAct {
            act: act.act,
            slot_values,
        })
    }
}

fn beta(params: (f64, f64), rng: &mut RandomStream) -> f64 {
    Beta::new(params.0, params.1)
        .expect("validated Beta parameters")
        .sample(rng)
}

/// Passes a true user act through the noise channel.
pub fn corrupt(
    act: &DialogAct,
    onto: &Ontology,
    cfg: &NoiseConfig,
    rng: &mut RandomStream,
) -> NBestList {
    let corrupted = rng.gen::<f64>() < cfg.error_rate;
    let top = if corrupted {
        distort(act, onto, true, rng)
    } else {
        Some(act.clone())
    };
    let Some(top) = top else {
        return NBestList::empty();
    };

    let top_conf = beta(
        if corrupted {
            cfg.confidence.incorrect
        } else {
            cfg.confidence.correct
        },
        rng,
    );
    let mut rest: Vec<(DialogAct, f64)> = Vec::new();
    let mut truth_listed = !corrupted;
    for _ in 1..cfg.nbest_size {
        let (alt, correct) = if !truth_listed && rng.gen::<bool>() {
            truth_listed = true;
            (Some(act.clone()), true)
        } else {
            (distort(act, onto, false, rng), false)
        };
        let Some(alt) = alt else { continue };
        if alt == top || rest.iter().any(|(a, _)| *a == alt) {
            continue;
        }
        let conf = beta(
            if correct {
                cfg.confidence.correct
            } else {
                cfg.confidence.incorrect
            },
            rng,
        );
        rest.push((alt, conf));
    }

    let total = top_conf + rest.iter().map(|(_, c)| c).sum::<f64>();
    let scale = if total > 1.0 { 1.0 / total } else { 1.0 };
    let top_conf = top_conf * scale;
    rest.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut hypotheses = vec![Hypothesis {
        act: top,
        confidence: top_conf,
    }];
    hypotheses.extend(rest.into_iter().map(|(act, c)| Hypothesis {
        act,
        confidence: (c * scale).min(top_conf),
    }));
    NBestList::new(hypotheses).expect("confidences are ordered and in [0, 1]")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialog_core::UserActType;
    use crate::rng::stream;

    fn inform() -> DialogAct {
        DialogAct::with(UserActType::Inform, "food", "thai")
    }

    #[test]
    fn noiseless_channel_keeps_truth_on_top() {
        let onto = Ontology::restaurant();
        let mut rng = stream(1, &[]);
        let cfg = NoiseConfig::new(0.0);
        for _ in 0..2000 {
            let nb = corrupt(&inform(), &onto, &cfg, &mut rng);
            assert_eq!(nb.top().unwrap().act, inform());
            assert!(nb
                .hypotheses()
                .windows(2)
                .all(|w| w[0].confidence >= w[1].confidence));
        }
    }

    #[test]
    fn saturated_channel_never_reports_truth_on_top() {
        let onto = Ontology::restaurant();
        let mut rng = stream(2, &[]);
        let cfg = NoiseConfig::new(1.0);
        let mut empty = 0;
        for _ in 0..2000 {
            let nb = corrupt(&inform(), &onto, &cfg, &mut rng);
            match nb.top() {
                None => empty += 1,
                Some(h) => {
                    assert_ne!(h.act, inform());
                    assert!(!h.act.slot_values.contains(&("food".into(), "thai".into())));
                }
            }
        }
        assert!(empty > 800 && empty < 1200, "{empty}");
    }

    #[test]
    fn valueless_acts_are_deleted_when_corrupted() {
        let onto = Ontology::restaurant();
        let mut rng = stream(3, &[]);
        let nb = corrupt(
            &DialogAct::new(UserActType::Affirm),
            &onto,
            &NoiseConfig::new(1.0),
            &mut rng,
        );
        assert!(nb.is_empty());
        let nb = corrupt(
            &DialogAct::new(UserActType::Affirm),
            &onto,
            &NoiseConfig::new(0.0),
            &mut rng,
        );
        assert_eq!(nb.hypotheses().len(), 1);
    }

    #[test]
    fn confidences_are_informative() {
        let onto = Ontology::restaurant();
        let mut rng = stream(4, &[]);
        let cfg = NoiseConfig::new(0.5);
        let (mut right, mut wrong) = (Vec::new(), Vec::new());
        for _ in 0..20_000 {
            let nb = corrupt(&inform(), &onto, &cfg, &mut rng);
            if let Some(h) = nb.top() {
                if h.act == inform() {
                    right.push(h.confidence)
                } else {
                    wrong.push(h.confidence)
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&right) > mean(&wrong) + 0.2);
    }

    #[test]
    fn config_validation() {
        assert!(NoiseConfig::new(0.3).validate().is_ok());
        assert!(NoiseConfig::new(1.3).validate().is_err());
        assert!(NoiseConfig {
            nbest_size: 0,
            ..NoiseConfig::new(0.1)
        }
        .validate()
        .is_err());
    }
}
