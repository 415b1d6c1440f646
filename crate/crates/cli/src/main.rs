//! `ringmix`: mixin selection for ring signatures under
//! coin-indistinguishability constraints.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(
    name = "ringmix",
    version,
    about = "Coin-indistinguishability-aware mixin selection",
    propagate_version = true
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalOpts {
    /// Seed for every randomized step; runs are bit-reproducible per seed.
    #[arg(long, global = true, env = "RINGMIX_SEED", default_value_t = 0)]
    seed: u64,
    /// Permutation tree node cap per level.
    #[arg(long, global = true, default_value_t = ringmix_core::DEFAULT_LEAF_CAP)]
    leaf_cap: u64,
    /// Knapsack precision parameter in (0,1).
    #[arg(long, global = true, default_value_t = 0.1)]
    delta: f64,
    /// Include wall-clock timings in output (off keeps output byte-stable).
    #[arg(long, global = true, default_value_t = false)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exact spend probabilities of a trace's ring signatures, as CSV.
    Oracle(commands::OracleArgs),
    /// Check one ring signature's indistinguishability level.
    Verify(commands::VerifyArgs),
    /// Extract the selection modules of a trace, as CSV.
    Modules(commands::ModulesArgs),
    /// Pick a mixin set for one spend.
    Select(commands::SelectArgs),
    /// Partition a trace into coin batches.
    Batch(commands::BatchArgs),
    /// Spend a coin through the batching framework, appending the new ring.
    Spend(commands::SpendArgs),
    /// Generate instances, shaped traces, or the bundled fixture.
    Gen(commands::GenArgs),
    /// Run a parameter sweep from a spec file.
    Bench(commands::BenchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Oracle(args) => commands::oracle(&cli.global, args),
        Command::Verify(args) => commands::verify(&cli.global, args),
        Command::Modules(args) => commands::modules(&cli.global, args),
        Command::Select(args) => commands::select(&cli.global, args),
        Command::Batch(args) => commands::batch(&cli.global, args),
        Command::Spend(args) => commands::spend(&cli.global, args),
        Command::Gen(args) => commands::gen(&cli.global, args),
        Command::Bench(args) => commands::bench(&cli.global, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
