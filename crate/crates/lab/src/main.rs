//! Command-line laboratory for the fourth-order nonlocal thin-film
//! growth equation.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage/config error,
//! 3 runtime/numerical failure.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use filmlab::config::{load_experiment, load_sweep};
use filmlab::datum::{build_datum, DatumDescriptor};
use filmlab::error::{LabError, LabResult};
use filmlab::runner::{classify, run_experiment, run_sweep};
use filmlab::suites::{run_suite, SUITES};
use filmlab_core::domain::DomainSpec;
use filmlab_core::nehari::{estimate_lambda_alpha, estimate_well_depth, OptimizerConfig};

#[derive(Parser)]
#[command(
    name = "filmlab",
    about = "Simulation and verification laboratory for the 1-D fourth-order \
             nonlocal thin-film growth equation",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment from a TOML config and write its artifacts.
    Simulate { config: PathBuf },
    /// Classify the config's initial datum against the blow-up criteria
    /// without integrating.
    Classify { config: PathBuf },
    /// Estimate the potential-well depth d for a domain.
    Welldepth {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 64)]
        modes: usize,
    },
    /// Estimate a lower bound on Λ_α for a domain.
    LambdaAlpha {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 64)]
        modes: usize,
    },
    /// Run every entry of a sweep config, each into its own directory.
    Sweep { config: PathBuf },
    /// Run a named verification suite and print its pass/fail table.
    Verify {
        /// One of: identities, criterion, crosscheck, welldepth, all.
        suite: String,
        /// Directory for suite artifacts and archived reports.
        #[arg(long, default_value = "verify-out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> LabResult<ExitCode> {
    match cli.cmd {
        Cmd::Simulate { config } => {
            let cfg = load_experiment(&config)?;
            let artifacts = run_experiment(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&artifacts).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Classify { config } => {
            let cfg = load_experiment(&config)?;
            let spec = cfg.spec.build()?;
            let descriptor = DatumDescriptor::from_config(&cfg.datum).map_err(LabError::from)?;
            let u0 = build_datum(&descriptor, &spec).map_err(LabError::from)?;
            let report = classify(&u0, &spec)?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Welldepth { a, p, modes } => {
            let spec = DomainSpec::new(a, p, modes).map_err(LabError::from)?;
            let est = estimate_well_depth(&spec, &OptimizerConfig::default())
                .map_err(LabError::from)?;
            println!("{}", serde_json::to_string_pretty(&est).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::LambdaAlpha { alpha, a, p, modes } => {
            let spec = DomainSpec::new(a, p, modes).map_err(LabError::from)?;
            let est = estimate_lambda_alpha(alpha, &spec, &OptimizerConfig::default())
                .map_err(LabError::from)?;
            println!("{}", serde_json::to_string_pretty(&est).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep { config } => {
            let cfg = load_sweep(&config)?;
            let artifacts = run_sweep(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&artifacts).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { suite, out } => {
            let names: Vec<&str> =
                if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut all_passed = true;
            for name in names {
                let report = run_suite(name, &out)?;
                print!("{}", report.render_table());
                all_passed &= report.all_passed();
            }
            if all_passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Err(LabError::Verification("at least one criterion failed".into()))
            }
        }
    }
}
