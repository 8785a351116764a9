use std::path::PathBuf;

use clap::Args;
use gadm_core::baselines::{train_linear_q, LinearQConfig, SimEnvironment};
use gadm_core::rng::derive_seed;
use gadm_core::simulator::simulate_policy;

use crate::common;
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct TrainRlArgs {
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    #[arg(long, default_value = "mixed")]
    pub noise: String,
    /// Training dialogs.
    #[arg(long, default_value_t = 100_000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0.3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1000)]
    pub test_episodes: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &TrainRlArgs) -> CliResult<()> {
    common::require_files([&args.ontology])?;
    if args.test_episodes == 0 {
        return Err(CliError::config("--test-episodes must be positive"));
    }
    let setup = common::setup(
        args.ontology.as_deref(),
        common::noise_schedule(&args.noise)?,
    )?;
    let cfg = LinearQConfig {
        learning_rate: args.learning_rate,
        epsilon: args.epsilon,
        episodes: args.episodes,
        gamma: setup.rewards.gamma,
    };
    cfg.validate()?;
    common::out_dir(&args.out)?;
    let policy = train_linear_q(&mut SimEnvironment::new(&setup), &cfg, args.seed)?;
    let summary = simulate_policy(
        &policy,
        &setup,
        args.test_episodes,
        derive_seed(args.seed, &[1]),
    )?;
    common::write(&args.out.join("weights.json"), policy.to_json())?;
    common::write_json(&args.out.join("summary.json"), &summary)?;
    println!(
        "test reward: {:.4} (std {:.4}), success {:.3}",
        summary.mean_return, summary.std_return, summary.success_rate
    );
    Ok(())
}
