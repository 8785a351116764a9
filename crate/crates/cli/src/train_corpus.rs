use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gadm_core::batch_rl::{
    build_comparison_dms, evaluate_policy_on_corpus, fitted_q_iteration, ActionClassifier,
    BatchError, ComparisonKind, CorpusFitness, CorpusFitnessKind, CorpusPolicy, FeatureRewards,
    FittedQConfig, ForestConfig, QModel, QValConfig, TemplateCorpusPolicy,
};
use gadm_core::corpus_io::{load_corpus, resample_splits, Corpus, ResamplePlan};
use gadm_core::evolution::{run_ga, GaConfig};
use gadm_core::policy_dsl::{pretty_print_instantiated, ParameterVector, TemplateAst};
use gadm_core::rng::derive_seed;
use gadm_core::CORPUS_TEMPLATE;
use serde::Serialize;

use crate::common::{self, MeanStd};
use crate::error::{CliError, CliResult};
use crate::train_sim::ga_config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFitnessArg {
    Npoints,
    Qval,
}

#[derive(Debug, Args)]
pub struct TrainCorpusArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Policy template; defaults to the built-in nine-clause corpus template.
    #[arg(long)]
    pub template: Option<PathBuf>,
    /// Fitness whose parameters are written as the result. Both GA variants
    /// are trained and evaluated.
    #[arg(long, value_enum, default_value_t = CorpusFitnessArg::Qval)]
    pub fitness: CorpusFitnessArg,
    #[arg(long, default_value_t = 12)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0.5)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = -100.0, allow_hyphen_values = true)]
    pub punish: f64,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub pop: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    /// Trees per forest.
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Fitted Q-iteration rounds.
    #[arg(long, default_value_t = 50)]
    pub fqi_iterations: usize,
    #[arg(long, default_value_t = 5)]
    pub n_min: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub const DM_NAMES: [&str; 5] = [
    "GA-QVal",
    "GA-NPoints",
    "SL-Original",
    "SL-MaxQ",
    "ThresholdedQ",
];

#[derive(Serialize)]
struct RoundRow<'a> {
    round: usize,
    dm: &'a str,
    score: f64,
}

#[derive(Serialize)]
struct ResultRow<'a> {
    dm: &'a str,
    mean: f64,
    std: f64,
}

#[derive(Serialize)]
struct RoundParams {
    round: usize,
    ga_qval: Vec<f64>,
    ga_npoints: Vec<f64>,
}

#[derive(Serialize)]
struct BestParams<'a> {
    fitness: CorpusFitnessArg,
    params: &'a [f64],
    train_fitness: f64,
    rounds: &'a [RoundParams],
}

pub struct Trained {
    pub q: QModel,
    pub clf: ActionClassifier,
    pub ga_qval: (ParameterVector, f64),
    pub ga_npoints: (ParameterVector, f64),
}

pub fn fqi_config(trees: usize, l_max: usize, n_min: usize, seed: u64) -> FittedQConfig {
    FittedQConfig {
        l_max,
        trees,
        n_min,
        seed,
        ..FittedQConfig::default()
    }
}

/// Fits the models on `train` and runs both GA variants.
pub fn train(
    ast: &TemplateAst,
    train: &Corpus,
    fqi: &FittedQConfig,
    qval: &QValConfig,
    ga: &GaConfig,
) -> CliResult<Trained> {
    let rewards = FeatureRewards::for_corpus(train);
    let q = fitted_q_iteration(train, &rewards, fqi)?.model;
    let forest = ForestConfig {
        seed: derive_seed(fqi.seed, &[1]),
        ..fqi.forest()
    };
    let clf = ActionClassifier::fit_corpus(train, &forest)?;
    let states = train.states();
    let run = |kind, salt: u64| -> CliResult<(ParameterVector, f64)> {
        let fitness = CorpusFitness::new(ast, &states, &q, Some(&clf), kind)?;
        let (best, _) = run_ga(
            &fitness,
            &GaConfig {
                seed: derive_seed(ga.seed, &[salt]),
                ..*ga
            },
        )?;
        let f = common::finite(best.fitness.unwrap_or(f64::NAN), "GA fitness")?;
        Ok((ParameterVector::new(best.genome)?, f))
    };
    let ga_qval = run(CorpusFitnessKind::QVal(*qval), 0)?;
    let ga_npoints = run(CorpusFitnessKind::NPoints, 1)?;
    Ok(Trained {
        q,
        clf,
        ga_qval,
        ga_npoints,
    })
}

/// Held-out scores in [`DM_NAMES`] order.
pub fn evaluate_all(
    ast: &TemplateAst,
    trained: &Trained,
    test: &Corpus,
    fqi: &FittedQConfig,
    qval: &QValConfig,
) -> CliResult<[f64; 5]> {
    let names = &test.header.feature_names;
    let actions = &test.header.action_set;
    if trained.q.feature_names() != names.as_slice() || trained.q.actions() != actions.as_slice() {
        return Err(BatchError::SchemaMismatch("train and test corpora differ".into()).into());
    }
    let rewards = FeatureRewards::for_corpus(test);
    let ga_q = TemplateCorpusPolicy::new(ast, trained.ga_qval.0.clone(), names, actions)?;
    let ga_n = TemplateCorpusPolicy::new(ast, trained.ga_npoints.0.clone(), names, actions)?;
    let dms = build_comparison_dms(&trained.q, &trained.clf, qval)?;
    debug_assert_eq!(dms.map(|d| d.kind), ComparisonKind::ALL);
    let policies: [&dyn CorpusPolicy; 5] = [&ga_q, &ga_n, &dms[0], &dms[1], &dms[2]];
    let mut out = [0.0; 5];
    for (o, p) in out.iter_mut().zip(policies) {
        *o = common::finite(
            evaluate_policy_on_corpus(p, test, &rewards, fqi)?,
            "policy value",
        )?;
    }
    Ok(out)
}

pub fn run(args: &TrainCorpusArgs) -> CliResult<()> {
    common::require_file(&args.corpus)?;
    common::require_files([&args.template, &args.config])?;
    let ga = ga_config(
        args.config.as_deref(),
        args.pop,
        args.generations,
        args.seed,
    )?;
    let qval = QValConfig {
        delta: args.delta,
        r_punish: args.punish,
    };
    qval.validate()?;
    let ast = common::template(args.template.as_deref(), CORPUS_TEMPLATE)?;
    if ast.has_structural_params() {
        return Err(BatchError::StructuralParamForbidden.into());
    }
    let plan = ResamplePlan {
        rounds: args.resamples.max(1),
        train_fraction: args.train_fraction,
        seed: args.seed,
    };
    if args.resamples > 0 {
        plan.validate()?;
    }
    fqi_config(args.trees, args.fqi_iterations, args.n_min, 0).validate()?;
    let corpus = load_corpus(&args.corpus)?;
    if corpus.transitions.is_empty() {
        return Err(CliError::data("corpus has no transitions"));
    }
    common::out_dir(&args.out)?;
    let stats = corpus.stats();
    println!("corpus: {} dialogs, {} turns", stats.dialogs, stats.turns);

    let mut rows = Vec::new();
    let mut per_dm: [Vec<f64>; 5] = Default::default();
    let mut round_params = Vec::new();
    if args.resamples > 0 {
        for (r, (train_set, test_set)) in resample_splits(&corpus, &plan)?.iter().enumerate() {
            let fqi = fqi_config(
                args.trees,
                args.fqi_iterations,
                args.n_min,
                derive_seed(args.seed, &[2, r as u64]),
            );
            let ga_r = GaConfig {
                seed: derive_seed(args.seed, &[3, r as u64]),
                ..ga
            };
            let trained = train(&ast, train_set, &fqi, &qval, &ga_r)?;
            let scores = evaluate_all(&ast, &trained, test_set, &fqi, &qval)?;
            for (i, &s) in scores.iter().enumerate() {
                rows.push(RoundRow {
                    round: r,
                    dm: DM_NAMES[i],
                    score: s,
                });
                per_dm[i].push(s);
            }
            round_params.push(RoundParams {
                round: r,
                ga_qval: trained.ga_qval.0.values().to_vec(),
                ga_npoints: trained.ga_npoints.0.values().to_vec(),
            });
            println!(
                "round {r}: {}",
                DM_NAMES
                    .iter()
                    .zip(scores)
                    .map(|(n, s)| format!("{n} {s:.2}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
    }

    // the delivered parameters are trained on the whole corpus
    let fqi = fqi_config(
        args.trees,
        args.fqi_iterations,
        args.n_min,
        derive_seed(args.seed, &[4]),
    );
    let final_ga = GaConfig {
        seed: derive_seed(args.seed, &[5]),
        ..ga
    };
    let full = train(&ast, &corpus, &fqi, &qval, &final_ga)?;
    let (params, train_fitness) = match args.fitness {
        CorpusFitnessArg::Qval => &full.ga_qval,
        CorpusFitnessArg::Npoints => &full.ga_npoints,
    };

    common::write_json(
        &args.out.join("best_params.json"),
        &BestParams {
            fitness: args.fitness,
            params: params.values(),
            train_fitness: *train_fitness,
            rounds: &round_params,
        },
    )?;
    common::write(
        &args.out.join("policy.dm"),
        pretty_print_instantiated(&ast, params)?,
    )?;
    if args.resamples > 0 {
        common::write_csv(&args.out.join("rounds.csv"), &rows)?;
        let summary: Vec<(&str, MeanStd)> = DM_NAMES
            .iter()
            .zip(&per_dm)
            .map(|(n, v)| (*n, common::summarize(v)))
            .collect();
        let table: Vec<ResultRow> = summary
            .iter()
            .map(|(dm, s)| ResultRow {
                dm,
                mean: s.mean,
                std: s.std,
            })
            .collect();
        common::write_csv(&args.out.join("results.csv"), &table)?;
        println!("\n{:<14} reward over {} resamples", "DM", args.resamples);
        for (dm, s) in &summary {
            println!("{dm:<14} {:.2} ({:.2})", s.mean, s.std);
        }
    }
    println!(
        "\nfull-corpus {:?} fitness: {train_fitness:.4}",
        args.fitness
    );
    Ok(())
}
