use gadm_core::baselines::*;
use gadm_core::dialog_core::DialogState;
use gadm_core::policy_dsl::{evaluate_policy, parse_template, ParameterVector};
use gadm_core::rng::{stream, RandomStream};
use gadm_core::simulator::{simulate_policy, DialogPolicy, NoiseSchedule, SimulationSetup};
use gadm_core::RESTAURANT_TEMPLATE;
use rand::Rng;

/// State 0: `go` (reward 0) moves to state 1, `stop` ends with reward 1.
/// State 1: `go` ends with reward 5, `stop` returns to state 0 with reward 0.
#[derive(Default)]
struct TwoState {
    at: usize,
    turns: usize,
    counts: [usize; 2],
}

fn one_hot(i: usize) -> Vec<f64> {
    if i == 0 {
        vec![1.0, 0.0]
    } else {
        vec![0.0, 1.0]
    }
}

impl Environment for TwoState {
    fn feature_names(&self) -> Vec<String> {
        vec!["a".into(), "b".into()]
    }
    fn actions(&self) -> Vec<String> {
        vec!["go".into(), "stop".into()]
    }
    fn reset(&mut self, _: &mut RandomStream) -> Result<Vec<f64>, BaselineError> {
        self.at = 0;
        self.turns = 0;
        Ok(one_hot(0))
    }
    fn step(&mut self, action: usize, _: &mut RandomStream) -> Result<Step, BaselineError> {
        self.counts[action] += 1;
        self.turns += 1;
        let (reward, next, done) = match (self.at, action) {
            (0, 0) => (0.0, 1, false),
            (0, _) => (1.0, 0, true),
            (_, 0) => (5.0, 0, true),
            _ => (0.0, 0, false),
        };
        self.at = next;
        Ok(Step {
            features: one_hot(next),
            reward,
            done: done || self.turns >= 20,
        })
    }
}

fn two_state_optimum(gamma: f64) -> [usize; 2] {
    let mut q = [[0.0f64; 2]; 2];
    for _ in 0..500 {
        let v = |s: usize, q: &[[f64; 2]; 2]| q[s][0].max(q[s][1]);
        q = [[gamma * v(1, &q), 1.0], [5.0, gamma * v(0, &q)]];
    }
    [0, 1].map(|s| if q[s][0] >= q[s][1] { 0 } else { 1 })
}

#[test]
fn learns_the_two_state_optimum() {
    let cfg = LinearQConfig {
        learning_rate: 0.5,
        epsilon: 0.3,
        episodes: 3000,
        gamma: 0.9,
    };
    let policy = train_linear_q(&mut TwoState::default(), &cfg, 1).unwrap();
    let best = two_state_optimum(0.9);
    assert_eq!(best, [0, 0]);
    for s in 0..2 {
        assert_eq!(
            policy.greedy(&one_hot(s)),
            best[s],
            "state {s}: {:?}",
            policy.q_values(&one_hot(s))
        );
    }
}

#[test]
fn full_exploration_is_uniform() {
    let mut env = TwoState::default();
    let cfg = LinearQConfig {
        learning_rate: 0.1,
        epsilon: 1.0,
        episodes: 20_000,
        gamma: 0.9,
    };
    train_linear_q(&mut env, &cfg, 2).unwrap();
    let total = (env.counts[0] + env.counts[1]) as f64;
    assert!(
        (env.counts[0] as f64 / total - 0.5).abs() < 0.01,
        "{:?}",
        env.counts
    );
}

#[test]
fn training_is_reproducible_and_guards_divergence() {
    let cfg = LinearQConfig {
        learning_rate: 0.5,
        epsilon: 0.3,
        episodes: 200,
        gamma: 0.9,
    };
    let a = train_linear_q(&mut TwoState::default(), &cfg, 3).unwrap();
    let b = train_linear_q(&mut TwoState::default(), &cfg, 3).unwrap();
    assert_eq!(a, b);
    let wild = LinearQConfig {
        learning_rate: 1e200,
        ..cfg
    };
    assert!(matches!(
        train_linear_q(&mut TwoState::default(), &wild, 3),
        Err(BaselineError::DivergenceDetected { .. })
    ));
    assert!(train_linear_q(
        &mut TwoState::default(),
        &LinearQConfig {
            epsilon: 1.5,
            ..cfg
        },
        3
    )
    .is_err());
}

#[test]
fn weights_round_trip_with_schema_check() {
    let cfg = LinearQConfig {
        learning_rate: 0.5,
        epsilon: 0.3,
        episodes: 50,
        gamma: 0.9,
    };
    let p = train_linear_q(&mut TwoState::default(), &cfg, 4).unwrap();
    let text = p.to_json();
    assert_eq!(
        LinearQPolicy::from_json(&text, &p.feature_names).unwrap(),
        p
    );
    assert!(matches!(
        LinearQPolicy::from_json(&text, &["x".to_string()]),
        Err(BaselineError::SchemaMismatch(_))
    ));
}

#[test]
fn rule_based_policy_is_the_template_evaluator() {
    let ast = parse_template(RESTAURANT_TEMPLATE).unwrap();
    let params = ParameterVector::new(vec![0.2, 0.7, 0.4, 0.1]).unwrap();
    let rule = rule_based_policy(&ast, params.clone()).unwrap();
    let mut rng = stream(5, &[]);
    let slots = ["food", "area", "pricerange", "name"];
    for _ in 0..200 {
        let mut state = DialogState::initial(&slots, 30);
        state.turn_index = rng.gen_range(0..5);
        state.top_slu_score = rng.gen();
        state.slu_valid = rng.gen::<f64>() < 0.8;
        for b in &mut state.slot_beliefs {
            if rng.gen::<f64>() < 0.7 {
                b.scores.insert("x".into(), rng.gen());
            }
        }
        let direct = evaluate_policy(&ast, &params, &state).unwrap();
        let via_rule = rule.act(&state).unwrap();
        assert_eq!(via_rule.label(), direct.act);
    }
    assert!(rule_based_policy(&ast, ParameterVector::new(vec![0.5]).unwrap()).is_err());
}

#[test]
fn heuristic_completes_clean_dialogs_and_degrades_with_noise() {
    let ast = parse_template(RESTAURANT_TEMPLATE).unwrap();
    let policy = heuristic_policy(&ast).unwrap();
    let clean = SimulationSetup::restaurant().with_schedule(NoiseSchedule::Fixed(0.0));
    let noisy = SimulationSetup::restaurant().with_schedule(NoiseSchedule::Fixed(0.6));
    let a = simulate_policy(&policy, &clean, 300, 6).unwrap();
    let b = simulate_policy(&policy, &noisy, 300, 6).unwrap();
    assert!(a.success_rate >= 0.95, "{a:?}");
    assert!(b.success_rate < a.success_rate - 0.5, "{b:?}");
}

#[test]
fn simulator_environment_runs_dialogs() {
    let setup = SimulationSetup::restaurant();
    let mut env = SimEnvironment::new(&setup);
    let cfg = LinearQConfig {
        episodes: 300,
        ..Default::default()
    };
    let p = train_linear_q(&mut env, &cfg, 7).unwrap();
    assert_eq!(p.feature_names.len(), 19);
    assert_eq!(p.actions.len(), 6);
    let summary = simulate_policy(&p, &setup, 50, 8).unwrap();
    assert!(summary.mean_return.is_finite());
    let mut fresh = SimEnvironment::new(&setup);
    assert!(fresh.step(0, &mut stream(9, &[])).is_err());
}
