use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use skewpmc_cli::{commands, study, CliResult, RunConfig};

#[derive(Parser)]
#[command(
    name = "skewpmc",
    version,
    about = "Bayesian inference for the multivariate skew-normal model"
)]
struct Cli {
    /// TOML file with run settings.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override a setting, e.g. `--set particles=5000`. Repeatable; applied in order.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Shorthand for `--set input=PATH`.
    #[arg(long, short, global = true)]
    input: Option<PathBuf>,
    /// Shorthand for `--set output=PATH`.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Shorthand for `--set seed=N`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a skew-normal sample.
    Simulate,
    /// Posterior summaries, trace and evidence for a data file.
    Fit,
    /// Bayes factor of the skew-normal against the normal model.
    Bf,
    /// Repeated simulation and fitting over (psi, rho) points.
    SimStudy,
    /// Monte Carlo estimates of the prior constant A and its (a, b) fit.
    EstimateA,
}

fn run(cli: Cli) -> CliResult<String> {
    let mut overrides = cli.overrides;
    let quoted = |p: PathBuf| format!("'{}'", p.display());
    if let Some(p) = cli.input {
        overrides.push(format!("input={}", quoted(p)));
    }
    if let Some(p) = cli.output {
        overrides.push(format!("output={}", quoted(p)));
    }
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Fit => commands::fit(&cfg),
        Command::Bf => commands::bf(&cfg),
        Command::SimStudy => study::sim_study(&cfg),
        Command::EstimateA => commands::estimate_a(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(msg) => {
            print!("{msg}");
            if !msg.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
