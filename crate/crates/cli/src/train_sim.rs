use std::path::PathBuf;

use clap::Args;
use gadm_core::baselines::heuristic_policy;
use gadm_core::evolution::{run_ga, GaConfig};
use gadm_core::policy_dsl::{pretty_print_instantiated, render_template, ParameterVector};
use gadm_core::rng::derive_seed;
use gadm_core::simulator::{simulate_policy, SimulationFitness, SimulationSummary, TemplatePolicy};
use gadm_core::{HEURISTIC_PARAMS, RESTAURANT_TEMPLATE};
use serde::Serialize;

use crate::common;
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct TrainSimArgs {
    /// Policy template; defaults to the built-in restaurant template.
    #[arg(long)]
    pub template: Option<PathBuf>,
    /// Domain ontology (TOML); defaults to the built-in restaurant domain.
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    /// GA settings (TOML). Command-line flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub pop: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    /// `mixed` or a fixed error rate.
    #[arg(long, default_value = "mixed")]
    pub noise: String,
    /// Simulated dialogs per fitness evaluation.
    #[arg(long, default_value_t = 100)]
    pub episodes: usize,
    /// Dialogs for the final test of the trained policy.
    #[arg(long, default_value_t = 1000)]
    pub test_episodes: usize,
    /// Disable every clause with this tag before training (repeatable).
    #[arg(long)]
    pub ablate: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct BestParams<'a> {
    params: &'a [f64],
    train_fitness: f64,
    ablated: &'a [String],
}

#[derive(Serialize)]
struct Summary {
    seed: u64,
    test_episodes: usize,
    ga: SimulationSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    heuristic: Option<SimulationSummary>,
}

/// GA settings from an optional file, with flag overrides. Without a file
/// the convergence stop is off so every requested generation is run.
pub fn ga_config(
    config: Option<&std::path::Path>,
    pop: Option<usize>,
    generations: Option<usize>,
    seed: u64,
) -> CliResult<GaConfig> {
    let mut cfg = match config {
        Some(p) => GaConfig::from_toml_str(&common::read_input(p)?)?,
        None => GaConfig {
            convergence_window: 0,
            ..GaConfig::default()
        },
    };
    if let Some(p) = pop {
        cfg.n_pop = p;
    }
    if let Some(g) = generations {
        cfg.t_max = g;
    }
    cfg.seed = seed;
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(args: &TrainSimArgs) -> CliResult<()> {
    common::require_files([&args.template, &args.ontology, &args.config])?;
    if args.episodes == 0 || args.test_episodes == 0 {
        return Err(CliError::config(
            "--episodes and --test-episodes must be positive",
        ));
    }
    let cfg = ga_config(
        args.config.as_deref(),
        args.pop,
        args.generations,
        args.seed,
    )?;
    let mut ast = common::template(args.template.as_deref(), RESTAURANT_TEMPLATE)?;
    for tag in &args.ablate {
        ast = ast.without_tag(tag)?;
    }
    let setup = common::setup(
        args.ontology.as_deref(),
        common::noise_schedule(&args.noise)?,
    )?;
    common::out_dir(&args.out)?;

    let fitness = SimulationFitness {
        ast: &ast,
        setup: &setup,
        n_episodes: args.episodes,
    };
    let (best, trace) = run_ga(&fitness, &cfg)?;
    let train_fitness = common::finite(best.fitness.unwrap_or(f64::NAN), "best fitness")?;
    let params = ParameterVector::new(best.genome.clone())?;

    let test_seed = derive_seed(args.seed, &[1]);
    let policy = TemplatePolicy::new(&ast, params.clone())?;
    let ga = simulate_policy(&policy, &setup, args.test_episodes, test_seed)?;
    let heuristic = if ast.param_count == HEURISTIC_PARAMS.len() {
        Some(simulate_policy(
            &heuristic_policy(&ast)?,
            &setup,
            args.test_episodes,
            test_seed,
        )?)
    } else {
        None
    };

    common::write_json(
        &args.out.join("best_params.json"),
        &BestParams {
            params: params.values(),
            train_fitness,
            ablated: &args.ablate,
        },
    )?;
    common::write(&args.out.join("template.dm"), render_template(&ast))?;
    common::write(
        &args.out.join("policy.dm"),
        pretty_print_instantiated(&ast, &params)?,
    )?;
    common::write(&args.out.join("trace.csv"), trace.to_csv())?;
    common::write_json(
        &args.out.join("summary.json"),
        &Summary {
            seed: args.seed,
            test_episodes: args.test_episodes,
            ga,
            heuristic,
        },
    )?;

    println!("generations run: {}", trace.rows.len() - 1);
    println!("train fitness:   {train_fitness:.4}");
    println!(
        "test reward:     {:.4} (std {:.4}), success {:.3}",
        ga.mean_return, ga.std_return, ga.success_rate
    );
    if let Some(h) = heuristic {
        println!(
            "heuristic:       {:.4} (std {:.4}), success {:.3}",
            h.mean_return, h.std_return, h.success_rate
        );
    }
    Ok(())
}
