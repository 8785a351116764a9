//! Genetic-algorithm optimization of templated dialog policies.
//!
//! Candidate parameter vectors instantiate a human-readable policy template
//! ([`policy_dsl`]) and are scored either online against a simulated noisy
//! user ([`simulator`]) or offline against a dialog corpus through fitted
//! Q-iteration ([`batch_rl`]). [`evolution`] hosts the optimizer itself.

pub mod baselines;
pub mod batch_rl;
pub mod corpus_io;
pub mod dialog_core;
pub mod evolution;
pub mod policy_dsl;
pub mod rng;
pub mod simulator;
pub mod stats;

/// Restaurant template: seven clauses under six tags, four free parameters.
pub const RESTAURANT_TEMPLATE: &str = include_str!("../data/templates/restaurant_sim.dm");

/// Nine-clause, six-parameter template for corpus fitness.
pub const CORPUS_TEMPLATE: &str = include_str!("../data/templates/corpus_reconstruction.dm");

/// Hand-set parameters of the rule-based baseline for [`RESTAURANT_TEMPLATE`].
pub const HEURISTIC_PARAMS: [f64; 4] = [0.3, 0.8, 0.5, 0.5];
