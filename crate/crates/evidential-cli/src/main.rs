//! `evidential`: train and evaluate regression models that report both
//! aleatoric and epistemic uncertainty from a single forward pass, along
//! with Gaussian-likelihood, deep-ensemble, and MC-dropout baselines.
//!
//! Every command is deterministic in `--seed` and its configuration: the
//! JSON and CSV outputs of two identical invocations are byte-identical.
//! Wall-clock measurements live in a separate `timing.json`.

mod commands;
mod outputs;
mod settings;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "evidential",
    version,
    about = "Deep evidential regression: uncertainty-aware training, evaluation, and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset to train/test CSV files
    Generate(settings::CommonArgs),
    /// Train one network; writes checkpoint.json, loss_trace.csv, report.json
    Train(settings::CommonArgs),
    /// Score a saved checkpoint on a dataset; writes report.json
    Eval(commands::eval::EvalArgs),
    /// Repeated-split benchmark with mean ± standard-error summaries
    Benchmark(commands::benchmark::BenchmarkArgs),
    /// Sweep the evidence-regularizer weight and track ID/OOD uncertainty
    AblateLambda(commands::ablate::AblateArgs),
    /// Train several model families on one dataset and compare their reports
    Compare(commands::compare::CompareArgs),
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Generate(args) => commands::generate::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Benchmark(args) => commands::benchmark::run(args),
        Command::AblateLambda(args) => commands::ablate::run(args),
        Command::Compare(args) => commands::compare::run(args),
    }
}
