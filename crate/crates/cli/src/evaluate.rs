use std::path::PathBuf;

use clap::Args;
use gadm_core::baselines::LinearQPolicy;
use gadm_core::batch_rl::{evaluate_policy_on_corpus, FeatureRewards, TemplateCorpusPolicy};
use gadm_core::corpus_io::load_corpus;
use gadm_core::evolution::run_ga;
use gadm_core::policy_dsl::{ParameterVector, TemplateAst};
use gadm_core::rng::derive_seed;
use gadm_core::simulator::{
    simulate_policy, DialogPolicy, NoiseSchedule, SimulationFitness, SimulationSetup,
    TemplatePolicy,
};
use gadm_core::{HEURISTIC_PARAMS, RESTAURANT_TEMPLATE};
use serde::Serialize;

use crate::common;
use crate::error::{CliError, CliResult};
use crate::train_corpus::fqi_config;
use crate::train_sim::ga_config;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub template: Option<PathBuf>,
    /// Parameter file or comma-separated values; defaults to the heuristic
    /// parameters for four-parameter templates.
    #[arg(long)]
    pub params: Option<String>,
    /// Evaluate a linear Q policy instead of a template.
    #[arg(long, conflicts_with_all = ["params", "template", "corpus"])]
    pub linear_weights: Option<PathBuf>,
    /// Score the policy off-line on this held-out corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    /// `mixed`, a single error rate, or a range such as `0.0..0.6`.
    #[arg(long, default_value = "0.0..0.6")]
    pub noise: String,
    /// Spacing of error rates in a range.
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    /// Test dialogs per noise level (or per trained policy in a sweep).
    #[arg(long, default_value_t = 1000)]
    pub episodes: usize,
    #[arg(long)]
    pub seed: u64,
    /// Train and test the template at each of these population sizes.
    #[arg(long, value_delimiter = ',')]
    pub pop_sweep: Vec<usize>,
    /// Independent GA runs per population size.
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long)]
    pub generations: Option<usize>,
    /// Simulated dialogs per fitness evaluation in a population sweep.
    #[arg(long, default_value_t = 100)]
    pub fitness_episodes: usize,
    /// Trees per forest for off-line scoring.
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 50)]
    pub fqi_iterations: usize,
    #[arg(long, default_value_t = 5)]
    pub n_min: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct NoiseRow {
    noise: String,
    mean_reward: f64,
    std_reward: f64,
    mean_turns: f64,
    success_rate: f64,
}

#[derive(Serialize)]
struct PopRow {
    pop: usize,
    runs: usize,
    train_mean: f64,
    train_std: f64,
    test_mean: f64,
    test_std: f64,
}

#[derive(Serialize)]
struct CorpusRow {
    dialogs: usize,
    turns: usize,
    score: f64,
}

/// Error rates named by `spec`, with their labels.
fn noise_levels(spec: &str, step: f64) -> CliResult<Vec<(String, NoiseSchedule)>> {
    if let Some((a, b)) = spec.split_once("..") {
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("bad noise range `{spec}`")))
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if step.is_nan() || step <= 0.0 || b < a {
            return Err(CliError::config(format!(
                "empty noise range `{spec}` with step {step}"
            )));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=n)
            .map(|i| {
                let e = ((a + i as f64 * step) * 1e9).round() / 1e9;
                (format!("{e:?}"), NoiseSchedule::Fixed(e))
            })
            .collect());
    }
    Ok(vec![(spec.to_string(), common::noise_schedule(spec)?)])
}

fn template_params(ast: &TemplateAst, spec: Option<&str>) -> CliResult<ParameterVector> {
    match spec {
        Some(s) => common::params(s),
        None if ast.param_count == HEURISTIC_PARAMS.len() => {
            Ok(ParameterVector::new(HEURISTIC_PARAMS.to_vec())?)
        }
        None => Err(CliError::config("--params is required for this template")),
    }
}

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    common::require_files([
        &args.template,
        &args.linear_weights,
        &args.corpus,
        &args.ontology,
    ])?;
    if args.episodes == 0 {
        return Err(CliError::config("--episodes must be positive"));
    }
    if let Some(corpus_path) = &args.corpus {
        return run_corpus(args, corpus_path);
    }
    let levels = noise_levels(&args.noise, args.step)?;
    for (_, s) in &levels {
        common::setup(args.ontology.as_deref(), s.clone())?;
    }
    if !args.pop_sweep.is_empty() {
        return run_pop_sweep(args, &levels);
    }
    common::out_dir(&args.out)?;

    let base = common::setup(args.ontology.as_deref(), NoiseSchedule::mixed())?;
    let linear;
    let ast;
    let template_policy;
    let policy: &dyn DialogPolicy = match &args.linear_weights {
        Some(path) => {
            let names = gadm_core::dialog_core::feature_names(&base.ontology.slot_names());
            linear = LinearQPolicy::from_json(&common::read_input(path)?, &names)?;
            &linear
        }
        None => {
            ast = common::template(args.template.as_deref(), RESTAURANT_TEMPLATE)?;
            template_policy =
                TemplatePolicy::new(&ast, template_params(&ast, args.params.as_deref())?)?;
            &template_policy
        }
    };

    let mut rows = Vec::new();
    for (label, schedule) in levels {
        let setup = SimulationSetup {
            schedule,
            ..base.clone()
        };
        let s = simulate_policy(policy, &setup, args.episodes, args.seed)?;
        println!(
            "noise {label:>5}: reward {:8.3}  turns {:6.2}  success {:.3}",
            s.mean_return, s.mean_turns, s.success_rate
        );
        rows.push(NoiseRow {
            noise: label,
            mean_reward: s.mean_return,
            std_reward: s.std_return,
            mean_turns: s.mean_turns,
            success_rate: s.success_rate,
        });
    }
    common::write_csv(&args.out.join("noise_sweep.csv"), &rows)
}

fn run_pop_sweep(args: &EvaluateArgs, levels: &[(String, NoiseSchedule)]) -> CliResult<()> {
    if levels.len() != 1 {
        return Err(CliError::config("a population sweep trains and tests at one noise setting; pass --noise mixed or a single rate"));
    }
    if args.runs == 0 || args.fitness_episodes == 0 || args.pop_sweep.contains(&0) {
        return Err(CliError::config(
            "--runs, --fitness-episodes and population sizes must be positive",
        ));
    }
    let setup = common::setup(args.ontology.as_deref(), levels[0].1.clone())?;
    let ast = common::template(args.template.as_deref(), RESTAURANT_TEMPLATE)?;
    ga_config(None, None, args.generations, args.seed)?;
    common::out_dir(&args.out)?;
    let fitness = SimulationFitness {
        ast: &ast,
        setup: &setup,
        n_episodes: args.fitness_episodes,
    };
    let mut rows = Vec::new();
    for &pop in &args.pop_sweep {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for run in 0..args.runs {
            let seed = derive_seed(args.seed, &[pop as u64, run as u64]);
            let cfg = ga_config(None, Some(pop), args.generations, seed)?;
            let (best, _) = run_ga(&fitness, &cfg)?;
            train.push(common::finite(
                best.fitness.unwrap_or(f64::NAN),
                "GA fitness",
            )?);
            let policy = TemplatePolicy::new(&ast, ParameterVector::new(best.genome)?)?;
            test.push(
                simulate_policy(&policy, &setup, args.episodes, derive_seed(seed, &[1]))?
                    .mean_return,
            );
        }
        let (tr, te) = (common::summarize(&train), common::summarize(&test));
        println!(
            "pop {pop:>5}: train {:.3} ({:.3})  test {:.3} ({:.3})",
            tr.mean, tr.std, te.mean, te.std
        );
        rows.push(PopRow {
            pop,
            runs: args.runs,
            train_mean: tr.mean,
            train_std: tr.std,
            test_mean: te.mean,
            test_std: te.std,
        });
    }
    common::write_csv(&args.out.join("pop_sweep.csv"), &rows)
}

fn run_corpus(args: &EvaluateArgs, corpus_path: &std::path::Path) -> CliResult<()> {
    let ast = common::template(args.template.as_deref(), gadm_core::CORPUS_TEMPLATE)?;
    let params = template_params(&ast, args.params.as_deref())?;
    let fqi = fqi_config(args.trees, args.fqi_iterations, args.n_min, args.seed);
    fqi.validate()?;
    let corpus = load_corpus(corpus_path)?;
    common::out_dir(&args.out)?;
    let policy = TemplateCorpusPolicy::new(
        &ast,
        params,
        &corpus.header.feature_names,
        &corpus.header.action_set,
    )?;
    let score =
        evaluate_policy_on_corpus(&policy, &corpus, &FeatureRewards::for_corpus(&corpus), &fqi)?;
    let score = common::finite(score, "policy value")?;
    let stats = corpus.stats();
    println!("corpus: {} dialogs, {} turns", stats.dialogs, stats.turns);
    println!("estimated reward of starting turns: {score:.6}");
    common::write_csv(
        &args.out.join("corpus_eval.csv"),
        &[CorpusRow {
            dialogs: stats.dialogs,
            turns: stats.turns,
            score,
        }],
    )
}
