use std::process::ExitCode;

use clap::{Parser, Subcommand};
use diqft_cli::experiments::{
    cmd_epr_heatmap, cmd_epsilon_heatmap, cmd_eta_heatmap, cmd_fidelity, cmd_gamma_heatmap,
    cmd_verify,
};
use diqft_cli::{CliError, Command, Overrides, SweepConfig};

#[derive(Parser)]
#[command(
    name = "diqft",
    version,
    about = "Distributed inverse-QFT experiment sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Pruned vs exact infidelity per threshold (simulation).
    Fidelity(Overrides),
    /// Per-node EPR pair heatmap (counting).
    Epr(Overrides),
    /// Coupling ratio heatmap (counting).
    Eta(Overrides),
    /// Minimal threshold per communication horizon (counting).
    Epsilon(Overrides),
    /// Communication overhead heatmap (counting).
    Gamma(Overrides),
    /// Lowered distributed circuits against the single-node transform.
    Verify {
        #[command(flatten)]
        flags: Overrides,
        /// Corrupt one rotation to check that the verifier fails.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (cmd, flags) = match &cli.command {
        Sub::Fidelity(f) => (Command::Fidelity, f),
        Sub::Epr(f) => (Command::Epr, f),
        Sub::Eta(f) => (Command::Eta, f),
        Sub::Epsilon(f) => (Command::Epsilon, f),
        Sub::Gamma(f) => (Command::Gamma, f),
        Sub::Verify { flags, .. } => (Command::Verify, flags),
    };
    let cfg = SweepConfig::resolve(cmd, flags)?;
    let written = match cli.command {
        Sub::Fidelity(_) => cmd_fidelity(&cfg)?,
        Sub::Epr(_) => vec![cmd_epr_heatmap(&cfg)?],
        Sub::Eta(_) => vec![cmd_eta_heatmap(&cfg)?],
        Sub::Epsilon(_) => vec![cmd_epsilon_heatmap(&cfg)?],
        Sub::Gamma(_) => vec![cmd_gamma_heatmap(&cfg)?],
        Sub::Verify { inject_fault, .. } => {
            let report = cmd_verify(&cfg, inject_fault)?;
            let path = cfg.out_dir.join("verify.csv");
            report.table().write(&path)?;
            let violations: Vec<_> = report.violations().collect();
            for v in violations.iter().take(20) {
                eprintln!("FAIL {v}");
            }
            if violations.len() > 20 {
                eprintln!("... {} more violations", violations.len() - 20);
            }
            println!(
                "{} runs over {} points, min fidelity {:e}, {} violations",
                report.runs(),
                report.points.len(),
                report.min_fidelity(),
                violations.len()
            );
            println!("{}", path.display());
            return Ok(violations.is_empty());
        }
    };
    for path in written {
        println!("{}", path.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
