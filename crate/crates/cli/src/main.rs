//! `gadm`: train and evaluate templated dialog policies.

mod common;
mod error;
mod evaluate;
mod generate;
mod train_corpus;
mod train_rl;
mod train_sim;

use clap::{Parser, Subcommand};

/// Genetic-algorithm dialog managers: training against a simulated user or a
/// logged corpus, and evaluation. Set RAYON_NUM_THREADS to limit threads.
#[derive(Debug, Parser)]
#[command(name = "gadm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize template parameters against the simulated user.
    TrainSim(train_sim::TrainSimArgs),
    /// Optimize template parameters on a dialog corpus and compare with supervised baselines.
    TrainCorpus(train_corpus::TrainCorpusArgs),
    /// Noise sweep, population sweep, or off-line corpus score of a policy.
    Evaluate(evaluate::EvaluateArgs),
    /// Log simulated dialogs as a corpus.
    GenerateCorpus(generate::GenerateArgs),
    /// Train the linear Q-learning baseline.
    TrainRl(train_rl::TrainRlArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::TrainSim(a) => train_sim::run(a),
        Command::TrainCorpus(a) => train_corpus::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::GenerateCorpus(a) => generate::run(a),
        Command::TrainRl(a) => train_rl::run(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.code);
    }
}
