use clap::{Parser, Subcommand};

use locex_cli::commands;

/// Estimation, randomization testing, and premetric estimation for locally
/// exchangeable data.
#[derive(Parser)]
#[command(name = "locex", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Local empirical measure estimates with error bounds at query points.
    Estimate(commands::EstimateArgs),
    /// Local randomization test with exact type-1 error control.
    Test(commands::TestArgs),
    /// Pre-data design: partition, penalty, sample requirements, weight profiles.
    Design(commands::DesignArgs),
    /// Estimate the strong canonical premetric between two covariates.
    EstimatePremetric(commands::EstimatePremetricArgs),
    /// Generate synthetic locally exchangeable data as a multi-realization CSV.
    Simulate(commands::SimulateArgs),
    /// Check the premetric axioms over the dataset's covariates.
    ValidatePremetric(commands::ValidatePremetricArgs),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Estimate(args) => commands::run_estimate(args).map(|json| (json, args.out.clone())),
        Command::Test(args) => commands::run_test(args).map(|json| (json, args.out.clone())),
        Command::Design(args) => commands::run_design(args).map(|json| (json, args.out.clone())),
        Command::EstimatePremetric(args) => {
            commands::run_estimate_premetric(args).map(|json| (json, args.out.clone()))
        }
        Command::Simulate(args) => commands::run_simulate(args).map(|json| (json, None)),
        Command::ValidatePremetric(args) => {
            commands::run_validate_premetric(args).map(|json| (json, args.out.clone()))
        }
    };
    match outcome {
        Ok((json, out)) => {
            // Reports written to --out are not duplicated on stdout.
            if out.is_none() {
                print!("{json}");
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(1);
        }
    }
}
