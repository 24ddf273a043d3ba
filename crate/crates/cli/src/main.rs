mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use ghc_core::census::CensusError;
use ghc_core::experiments::ExperimentError;
use ghc_core::exponent::ExponentError;
use ghc_core::flowbox::FlowBoxError;
use ghc_core::marking::Violation;
use ghc_core::mobius::MobiusError;
use serde_json::json;

use commands::Report;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "ghc", version, about = "Closed geodesic and holonomy censuses for marked Schottky groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate primitive conjugacy classes up to length T into a store.
    Census(RunConfig),
    /// Estimate the critical exponent from an orbit table.
    Exponent(RunConfig),
    /// Sample the Patterson-Sullivan measure.
    Patterson(RunConfig),
    /// Closed geodesic counts over a T grid.
    Counts(RunConfig),
    /// Holonomy sector counts and KS distance.
    Holonomy(RunConfig),
    /// mu_T, eta_T and the comparison sandwich for a flow box.
    Boxmeasure(RunConfig),
    /// Lower and upper counts of V_T for a flow box.
    VtCount(RunConfig),
    /// Check the closing lemma on returns to a flow box.
    ClosingLemma(RunConfig),
    /// Check the Abel summation identity for eta_T.
    AbelCheck(RunConfig),
    /// Run a check and exit nonzero when it fails.
    #[command(subcommand)]
    Verify(Check),
    /// Run the subcommand named in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum Check {
    ClosingLemma(RunConfig),
    AbelCheck(RunConfig),
    Comparison(RunConfig),
}

fn dispatch(name: &str, cfg: &RunConfig) -> Result<(Report, bool)> {
    let verify = name.starts_with("verify ");
    let report = match name.trim_start_matches("verify ") {
        "census" if !verify => commands::census(cfg)?,
        "exponent" if !verify => commands::exponent(cfg)?,
        "patterson" if !verify => commands::patterson(cfg)?,
        "counts" if !verify => commands::counts(cfg)?,
        "holonomy" if !verify => commands::holonomy(cfg)?,
        "boxmeasure" | "comparison" => commands::boxmeasure(cfg)?,
        "vt-count" if !verify => commands::vt_count(cfg)?,
        "closing-lemma" => commands::closing_lemma(cfg)?,
        "abel-check" => commands::abel_check(cfg)?,
        other => bail!("unknown command {other:?}"),
    };
    Ok((report, verify))
}

fn run(cli: Cli) -> Result<(Report, bool)> {
    let (name, cfg) = match cli.command {
        Command::Census(c) => ("census", c),
        Command::Exponent(c) => ("exponent", c),
        Command::Patterson(c) => ("patterson", c),
        Command::Counts(c) => ("counts", c),
        Command::Holonomy(c) => ("holonomy", c),
        Command::Boxmeasure(c) => ("boxmeasure", c),
        Command::VtCount(c) => ("vt-count", c),
        Command::ClosingLemma(c) => ("closing-lemma", c),
        Command::AbelCheck(c) => ("abel-check", c),
        Command::Verify(Check::ClosingLemma(c)) => ("verify closing-lemma", c),
        Command::Verify(Check::AbelCheck(c)) => ("verify abel-check", c),
        Command::Verify(Check::Comparison(c)) => ("verify comparison", c),
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let name = cfg.command.clone();
            return dispatch(&name, &cfg);
        }
    };
    let cfg = RunConfig { command: name.to_string(), ..cfg };
    dispatch(name, &cfg)
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        if cause.is::<CensusError>() {
            return "census";
        }
        if cause.is::<ExperimentError>() {
            return "experiment";
        }
        if cause.is::<ExponentError>() {
            return "exponent";
        }
        if cause.is::<FlowBoxError>() || cause.is::<MobiusError>() {
            return "geometry";
        }
        if cause.is::<std::io::Error>() {
            return "io";
        }
        if cause.is::<serde_json::Error>() {
            return "format";
        }
    }
    "config"
}

fn set_threads() -> Result<()> {
    if let Ok(v) = std::env::var("GHC_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("GHC_THREADS must be a positive integer"))?;
        if n == 0 {
            bail!("GHC_THREADS must be a positive integer");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": msg.trim() }));
            return ExitCode::from(64);
        }
    };
    match set_threads().and_then(|_| run(cli)) {
        Ok((report, verify)) => {
            for l in &report.lines {
                println!("{l}");
            }
            if verify && !report.ok {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            if let Some(v) = e.chain().find_map(|c| c.downcast_ref::<Violation>()) {
                eprintln!("{}", json!({ "error": "invalid_marking", "message": v.to_string(), "violation": v }));
                return ExitCode::from(2);
            }
            eprintln!("{}", json!({ "error": error_kind(&e), "message": format!("{e:#}") }));
            ExitCode::from(1)
        }
    }
}
