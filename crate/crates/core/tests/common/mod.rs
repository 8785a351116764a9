#![allow(dead_code)]

pub mod templates;

use gadm_core::corpus_io::{Corpus, CorpusHeader};
use gadm_core::dialog_core::{feature_names, RewardConfig, Transition, SYSTEM_ACTIONS};
use gadm_core::rng::stream;
use rand::Rng;

pub const ADVANCE: usize = 0;
pub const QUIT: usize = 1;

/// Three-state chain: `advance` moves right and pays 10 when leaving the last
/// state; `quit` ends the episode anywhere with reward 1.
pub fn chain_reward(s: &[f64], a: &str, _s_next: &[f64]) -> f64 {
    match a {
        "advance" if s[2] > 0.5 => 10.0,
        "advance" => 0.0,
        _ => 1.0,
    }
}

pub fn chain_state(i: usize) -> Vec<f64> {
    let mut v = vec![0.0; 3];
    if i < 3 {
        v[i] = 1.0;
    }
    v
}

/// Exact optimal `Q[state][action]` by value iteration.
pub fn chain_q_star(gamma: f64) -> [[f64; 2]; 3] {
    let mut q = [[0.0; 2]; 3];
    for _ in 0..200 {
        let v = |i: usize, q: &[[f64; 2]; 3]| if i < 3 { q[i][0].max(q[i][1]) } else { 0.0 };
        let mut next = q;
        for i in 0..3 {
            next[i][ADVANCE] = if i == 2 { 10.0 } else { gamma * v(i + 1, &q) };
            next[i][QUIT] = 1.0;
        }
        q = next;
    }
    q
}

/// Episodes starting in state 0; `p_advance` is the behaviour policy's
/// probability of advancing.
pub fn chain_corpus(episodes: usize, p_advance: f64, seed: u64) -> Corpus {
    let header = CorpusHeader::new(
        vec!["s0".into(), "s1".into(), "s2".into()],
        vec!["advance".into(), "quit".into()],
        RewardConfig::corpus(),
    );
    let mut rng = stream(seed, &[]);
    let mut ts = Vec::new();
    for e in 0..episodes {
        let mut i = 0;
        let mut turn = 0;
        loop {
            let advance = rng.gen::<f64>() < p_advance;
            let next = if advance { i + 1 } else { 3 };
            ts.push(Transition {
                dialog_id: format!("ep{e}"),
                turn,
                s: chain_state(i),
                a: if advance { "advance" } else { "quit" }.into(),
                s_next: chain_state(next),
                terminal: next == 3,
            });
            if next == 3 {
                break;
            }
            i = next;
            turn += 1;
        }
    }
    Corpus::new(header, ts).expect("well-formed chain corpus")
}

pub fn within(actual: f64, expected: f64, rel: f64) -> bool {
    (actual - expected).abs() <= rel * expected.abs().max(1e-12)
}

/// One-turn dialogs over random restaurant feature vectors and random
/// logged actions.
pub fn synthetic_dialog_corpus(n: usize, seed: u64) -> Corpus {
    let names = feature_names(&["food", "area", "pricerange", "name"]);
    let actions: Vec<String> = SYSTEM_ACTIONS.iter().map(|s| s.to_string()).collect();
    let flags = [
        "dialog_start",
        "no_slu",
        "user_denied",
        "require_more_pending",
        "offer_correct",
        "offer_duplicate",
        "offer_wrong",
    ];
    let mut rng = stream(seed, &[]);
    let random_state = |rng: &mut gadm_core::rng::RandomStream| -> Vec<f64> {
        names
            .iter()
            .map(|n| {
                if flags.contains(&n.as_str()) {
                    (rng.gen::<f64>() < 0.2) as u8 as f64
                } else {
                    rng.gen()
                }
            })
            .collect()
    };
    let ts = (0..n)
        .map(|i| Transition {
            dialog_id: format!("d{i}"),
            turn: 0,
            s: random_state(&mut rng),
            a: actions[rng.gen_range(0..actions.len())].clone(),
            s_next: random_state(&mut rng),
            terminal: true,
        })
        .collect();
    Corpus::new(
        CorpusHeader::new(names.clone(), actions, RewardConfig::corpus()),
        ts,
    )
    .unwrap()
}
