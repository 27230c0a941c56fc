use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use localham_cli::commands::{self, Body2dArgs, CorrelatedArgs, ParentArgs, RdmArgs, VerifyArgs};
use localham_cli::demo::{self, Demo};
use localham_cli::error::{CliError, EXIT_NEGATIVE, EXIT_OK};
use localham_cli::files::{write_json, SCHEMA_VERSION};
use localham_cli::{CliResult, Outcome};
use serde_json::json;

/// Local parent Hamiltonians and marginal-correlation certificates.
#[derive(Parser, Debug)]
#[command(name = "localham", version)]
struct Cli {
    /// Worker threads for internal parallelism
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Write the machine-readable result (JSON) here
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduced density matrices of a state on a pattern
    Rdm(RdmArgs),
    /// Decide whether a subspace is determined by its pattern marginals
    Correlated(CorrelatedArgs),
    /// Build a local Hamiltonian whose ground space is the given subspace
    Parent(ParentArgs),
    /// Check that a Hamiltonian's ground space equals a subspace
    Verify(VerifyArgs),
    /// Joint numerical range of two observables
    Body2d(Body2dArgs),
    /// Run a built-in scenario and check its expected outcome
    Demo {
        #[arg(value_enum)]
        name: Demo,
        /// Seed for randomized scenarios
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run_demo(name: Demo, seed: u64) -> CliResult<Outcome> {
    let checks = demo::run(name, seed)?;
    let pass = checks.iter().all(|c| c.pass);
    let mut summary = String::new();
    for c in &checks {
        let mark = if c.pass { "pass" } else { "FAIL" };
        summary += &format!("[{mark}] {}", c.name);
        if !c.detail.is_empty() {
            summary += &format!(": {}", c.detail);
        }
        summary.push('\n');
    }
    summary += if pass { "all checks passed" } else { "some checks failed" };
    let label = clap::ValueEnum::to_possible_value(&name).expect("named").get_name().to_string();
    let machine = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "demo",
        "name": label,
        "seed": seed,
        "pass": pass,
        "checks": checks,
    });
    Ok(Outcome { summary, machine, exit_code: if pass { EXIT_OK } else { EXIT_NEGATIVE } })
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    if cli.threads == 0 {
        return Err(CliError::input("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::input(e.to_string()))?;
    let outcome = match &cli.command {
        Command::Rdm(a) => commands::rdm(a),
        Command::Correlated(a) => commands::correlated(a),
        Command::Parent(a) => commands::parent(a),
        Command::Verify(a) => commands::verify(a),
        Command::Body2d(a) => commands::body2d(a),
        Command::Demo { name, seed } => run_demo(*name, *seed),
    }?;
    if let Some(path) = &cli.out {
        write_json(path, &outcome.machine)?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            println!("{}", o.summary);
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
