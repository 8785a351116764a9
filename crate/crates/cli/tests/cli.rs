use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gadm_core::corpus_io::{save_corpus, Corpus, CorpusHeader};
use gadm_core::dialog_core::{RewardConfig, Transition};
use gadm_core::rng::stream;
use rand::Rng;
use tempfile::TempDir;

fn gadm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gadm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = gadm(args);
    assert!(
        out.status.success(),
        "gadm {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> i32 {
    gadm(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const CHAIN_FEATURES: [&str; 4] = ["s0", "s1", "s2", "offer_correct"];

const CHAIN_TEMPLATE: &str = "\
num s0
num s1
num s2
action Request
action Offer
%%
if s2 > p0 then Offer else Request
";

fn chain_state(i: usize, offered: bool) -> Vec<f64> {
    let mut v = vec![0.0; 4];
    if i < 3 {
        v[i] = 1.0;
    }
    v[3] = offered as u8 as f64;
    v
}

/// Three-step chain: `Request` advances, `Offer` ends the dialog and is only
/// rewarded (10) from the last state. `Request` in the last state hangs up.
/// The behaviour policy requests with probability `p_request`; at zero it is
/// the deterministic policy that requests until the last state.
fn chain_corpus(dir: &Path, dialogs: usize, p_request: f64, seed: u64) -> std::path::PathBuf {
    let header = CorpusHeader::new(
        CHAIN_FEATURES.iter().map(|s| s.to_string()).collect(),
        vec!["Request".into(), "Offer".into()],
        RewardConfig {
            per_turn: 0.0,
            correct_offer: 10.0,
            duplicate_offer: 0.0,
            wrong_offer: 0.0,
            gamma: 0.9,
        },
    );
    let mut rng = stream(seed, &[]);
    let mut ts = Vec::new();
    for d in 0..dialogs {
        let mut i = 0;
        for turn in 0.. {
            let request = if p_request == 0.0 {
                i < 2
            } else {
                rng.gen::<f64>() < p_request
            };
            let (next, offered) = match (request, i) {
                (true, 2) => (3, false),
                (true, _) => (i + 1, false),
                (false, 2) => (3, true),
                (false, _) => (3, false),
            };
            ts.push(Transition {
                dialog_id: format!("d{d:04}"),
                turn,
                s: chain_state(i, false),
                a: if request { "Request" } else { "Offer" }.into(),
                s_next: chain_state(next, offered),
                terminal: next == 3,
            });
            if next == 3 {
                break;
            }
            i = next;
        }
    }
    let path = dir.join("chain.jsonl");
    save_corpus(&Corpus::new(header, ts).unwrap(), &path).unwrap();
    path
}

#[test]
fn train_sim_is_deterministic_and_runs_every_generation() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&[
            "train-sim",
            "--generations",
            "30",
            "--pop",
            "100",
            "--seed",
            "11",
            "--episodes",
            "2",
            "--test-episodes",
            "20",
            "--out",
            s(out),
        ]);
    }
    for file in [
        "best_params.json",
        "template.dm",
        "policy.dm",
        "trace.csv",
        "summary.json",
    ] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file} differs between identical runs"
        );
    }
    assert_eq!(csv_rows(&a.join("trace.csv")).len(), 31);
    let best: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("best_params.json")).unwrap()).unwrap();
    assert_eq!(best["params"].as_array().unwrap().len(), 4);
}

#[test]
fn ablation_removes_the_tagged_clause() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("abl");
    ok(&[
        "train-sim",
        "--generations",
        "2",
        "--pop",
        "6",
        "--seed",
        "3",
        "--episodes",
        "2",
        "--test-episodes",
        "10",
        "--ablate",
        "c4",
        "--out",
        s(&out),
    ]);
    let template = fs::read_to_string(out.join("template.dm")).unwrap();
    assert!(!template.contains("[c4]"));
    assert!(template.contains("[c3]"));
    let best = fs::read_to_string(out.join("best_params.json")).unwrap();
    assert!(best.contains("\"c4\""));
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let base = [
        "train-sim",
        "--generations",
        "1",
        "--pop",
        "8",
        "--seed",
        "1",
        "--episodes",
        "1",
    ];

    let missing = dir.path().join("missing.dm");
    assert_eq!(
        code(&[&base[..], &["--template", s(&missing), "--out", s(&out)]].concat()),
        2
    );
    assert_eq!(
        code(&[&base[..], &["--ablate", "nope", "--out", s(&out)]].concat()),
        2
    );
    assert_eq!(
        code(&[&base[..], &["--pop", "0", "--out", s(&out)]].concat()),
        2
    );

    let bad = dir.path().join("bad.dm");
    fs::write(&bad, "if no_slu then then Repeat else Offer").unwrap();
    assert_eq!(
        code(&[&base[..], &["--template", s(&bad), "--out", s(&out)]].concat()),
        3
    );

    let garbled = dir.path().join("garbled.jsonl");
    fs::write(&garbled, "{not json\n").unwrap();
    assert_eq!(
        code(&[
            "train-corpus",
            "--corpus",
            s(&garbled),
            "--seed",
            "1",
            "--out",
            s(&out)
        ]),
        3
    );

    // a policy that reads a variable the corpus does not record
    let corpus = chain_corpus(dir.path(), 20, 0.8, 1);
    let foreign = dir.path().join("foreign.dm");
    fs::write(
        &foreign,
        "num s9\naction Offer\naction Request\n%%\nif s9 > p0 then Offer else Request\n",
    )
    .unwrap();
    assert_eq!(
        code(&[
            "evaluate",
            "--corpus",
            s(&corpus),
            "--template",
            s(&foreign),
            "--params",
            "0.5",
            "--seed",
            "1",
            "--trees",
            "5",
            "--fqi-iterations",
            "3",
            "--out",
            s(&out),
        ]),
        4
    );

    let structural = dir.path().join("structural.dm");
    fs::write(
        &structural,
        "if top_slu_score < p0 then Request else Offer(filter=p1)",
    )
    .unwrap();
    assert_eq!(
        code(&[
            "train-corpus",
            "--corpus",
            s(&corpus),
            "--template",
            s(&structural),
            "--seed",
            "1",
            "--out",
            s(&out),
        ]),
        2
    );
}

#[test]
fn evaluate_scores_the_behaviour_policy_on_a_chain() {
    let dir = TempDir::new().unwrap();
    let corpus = chain_corpus(dir.path(), 200, 0.0, 5);
    let tpl = dir.path().join("chain.dm");
    fs::write(&tpl, CHAIN_TEMPLATE).unwrap();
    let out = dir.path().join("eval");
    ok(&[
        "evaluate",
        "--corpus",
        s(&corpus),
        "--template",
        s(&tpl),
        "--params",
        "0.5",
        "--seed",
        "2",
        "--trees",
        "20",
        "--fqi-iterations",
        "30",
        "--out",
        s(&out),
    ]);
    let rows = csv_rows(&out.join("corpus_eval.csv"));
    let score: f64 = rows[0][2].parse().unwrap();
    assert!((score - 8.1).abs() <= 0.05 * 8.1, "score {score}");
}

#[test]
fn train_corpus_reports_every_decision_maker() {
    let dir = TempDir::new().unwrap();
    let gen = dir.path().join("gen");
    ok(&[
        "generate-corpus",
        "--episodes",
        "40",
        "--epsilon",
        "0.2",
        "--seed",
        "9",
        "--out",
        s(&gen),
    ]);
    let corpus = gen.join("corpus.jsonl");
    let run = |out: &Path| {
        ok(&[
            "train-corpus",
            "--corpus",
            s(&corpus),
            "--resamples",
            "12",
            "--pop",
            "6",
            "--generations",
            "2",
            "--trees",
            "4",
            "--fqi-iterations",
            "3",
            "--seed",
            "4",
            "--out",
            s(out),
        ])
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let stdout = String::from_utf8(run(&a).stdout).unwrap();
    run(&b);
    for file in ["results.csv", "rounds.csv", "best_params.json", "policy.dm"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    let results = csv_rows(&a.join("results.csv"));
    let names: Vec<&str> = results.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        names,
        [
            "GA-QVal",
            "GA-NPoints",
            "SL-Original",
            "SL-MaxQ",
            "ThresholdedQ"
        ]
    );
    assert_eq!(csv_rows(&a.join("rounds.csv")).len(), 12 * 5);
    for name in names {
        assert!(stdout.contains(name));
    }
}

#[test]
fn npoints_reaches_the_triplet_count_when_the_template_can_match() {
    let dir = TempDir::new().unwrap();
    let corpus = chain_corpus(dir.path(), 300, 0.7, 8);
    let tpl = dir.path().join("chain.dm");
    fs::write(&tpl, CHAIN_TEMPLATE).unwrap();
    let out = dir.path().join("np");
    ok(&[
        "train-corpus",
        "--corpus",
        s(&corpus),
        "--template",
        s(&tpl),
        "--fitness",
        "npoints",
        "--resamples",
        "0",
        "--pop",
        "10",
        "--generations",
        "5",
        "--trees",
        "20",
        "--fqi-iterations",
        "20",
        "--seed",
        "1",
        "--out",
        s(&out),
    ]);
    let n = fs::read_to_string(&corpus).unwrap().lines().count() - 1;
    let best: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("best_params.json")).unwrap()).unwrap();
    assert_eq!(best["train_fitness"].as_f64().unwrap(), n as f64);
    assert!(!out.join("results.csv").exists());
}

#[test]
fn evaluate_sweeps_noise_and_population() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep");
    ok(&[
        "evaluate",
        "--episodes",
        "30",
        "--seed",
        "1",
        "--out",
        s(&out),
    ]);
    let rows = csv_rows(&out.join("noise_sweep.csv"));
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0][0], "0.0");
    assert_eq!(rows[6][0], "0.6");

    let pop = dir.path().join("pop");
    ok(&[
        "evaluate",
        "--pop-sweep",
        "8,12",
        "--runs",
        "2",
        "--generations",
        "2",
        "--fitness-episodes",
        "3",
        "--episodes",
        "10",
        "--noise",
        "mixed",
        "--seed",
        "1",
        "--out",
        s(&pop),
    ]);
    let rows = csv_rows(&pop.join("pop_sweep.csv"));
    assert_eq!(
        rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(),
        ["8", "12"]
    );
}

#[test]
fn linear_q_baseline_trains_and_evaluates() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rl");
    ok(&[
        "train-rl",
        "--episodes",
        "500",
        "--test-episodes",
        "20",
        "--seed",
        "2",
        "--out",
        s(&out),
    ]);
    let weights = out.join("weights.json");
    let eval = dir.path().join("rl-eval");
    ok(&[
        "evaluate",
        "--linear-weights",
        s(&weights),
        "--noise",
        "0.1",
        "--episodes",
        "20",
        "--seed",
        "1",
        "--out",
        s(&eval),
    ]);
    assert_eq!(csv_rows(&eval.join("noise_sweep.csv")).len(), 1);
}
