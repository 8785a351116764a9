use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gadm_core::corpus_io::save_corpus;
use gadm_core::dialog_core::RewardConfig;
use gadm_core::policy_dsl::ParameterVector;
use gadm_core::simulator::{collect_corpus, TemplatePolicy};
use gadm_core::{HEURISTIC_PARAMS, RESTAURANT_TEMPLATE};

use crate::common;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RewardScheme {
    Corpus,
    Simulation,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub template: Option<PathBuf>,
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    #[arg(long, default_value = "mixed")]
    pub noise: String,
    /// Number of dialogs.
    #[arg(long, default_value_t = 1000)]
    pub episodes: usize,
    /// Probability of a random system action on each turn.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Reward scheme recorded in the corpus header.
    #[arg(long, value_enum, default_value_t = RewardScheme::Corpus)]
    pub reward: RewardScheme,
    #[arg(long)]
    pub seed: u64,
    /// Output directory; the corpus is written to `corpus.jsonl`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &GenerateArgs) -> CliResult<()> {
    common::require_files([&args.template, &args.ontology])?;
    let ast = common::template(args.template.as_deref(), RESTAURANT_TEMPLATE)?;
    let params = match &args.params {
        Some(s) => common::params(s)?,
        None if ast.param_count == HEURISTIC_PARAMS.len() => {
            ParameterVector::new(HEURISTIC_PARAMS.to_vec())?
        }
        None => return Err(CliError::config("--params is required for this template")),
    };
    let setup = common::setup(
        args.ontology.as_deref(),
        common::noise_schedule(&args.noise)?,
    )?;
    let rewards = match args.reward {
        RewardScheme::Corpus => RewardConfig::corpus(),
        RewardScheme::Simulation => RewardConfig::simulation(),
    };
    let policy = TemplatePolicy::new(&ast, params)?;
    let corpus = collect_corpus(
        &policy,
        &setup,
        args.episodes,
        args.epsilon,
        rewards,
        args.seed,
    )?;
    common::out_dir(&args.out)?;
    let path = args.out.join("corpus.jsonl");
    save_corpus(&corpus, &path).map_err(CliError::from)?;
    let stats = corpus.stats();
    println!(
        "wrote {}: {} dialogs, {} turns",
        path.display(),
        stats.dialogs,
        stats.turns
    );
    Ok(())
}
