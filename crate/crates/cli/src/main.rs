//! `casimir-fp`: Debye lengths, Casimir pressures, suspension equilibria,
//! sweeps and cavity spectra from a TOML run configuration.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numeric non-convergence,
//! 4 no stable equilibrium, 1 anything else.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use commands::Status;
use config::{RunConfig, ValidationError, MATERIALS_ENV};
use output::Provenance;
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "casimir-fp", version, about = "Casimir suspension and Fabry-Perot cavity calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// CSV output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write a JSON mirror of the table here.
    #[arg(long, global = true)]
    json: Option<PathBuf>,

    /// Worker threads for the numerical core.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Relative accuracy target, overriding `numerics.tolerance`.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Materials database used when the config names none.
    #[arg(long, global = true, env = MATERIALS_ENV, hide_env_values = true)]
    materials: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Debye length over a concentration grid.
    Debye,
    /// Pressure decomposition over a separation grid.
    Pressure,
    /// Equilibrium separation of the plate.
    Equilibrium,
    /// Equilibria across Debye length, temperature or coating thickness.
    Sweep,
    /// Reflectance, transmittance and absorbance of the cavity.
    Spectrum,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Debye => "debye",
            Command::Pressure => "pressure",
            Command::Equilibrium => "equilibrium",
            Command::Sweep => "sweep",
            Command::Spectrum => "spectrum",
        }
    }
}

fn run(cli: &Cli) -> Result<Status> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| ValidationError("--config: required".into()))?;
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| ValidationError("config: not valid UTF-8".into()))?;
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    let mut cfg = RunConfig::parse(&text, &base, cli.materials.clone())?;
    if let Some(t) = cli.tolerance {
        cfg.numerics.set_tolerance(t);
        cfg.numerics
            .validate()
            .map_err(|e| ValidationError(format!("--tolerance: {e}")))?;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ValidationError("--threads: must be >= 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }

    let (table, status) = match cli.command {
        Command::Debye => commands::debye(&cfg)?,
        Command::Pressure => commands::pressure(&cfg)?,
        Command::Equilibrium => commands::equilibrium(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
        Command::Spectrum => commands::spectrum_cmd(&cfg)?,
    };

    let prov = Provenance {
        command: cli.command.name().to_string(),
        config_sha256: hex::encode(Sha256::digest(&bytes)),
        materials_version: cfg.db.version.clone(),
        materials_source: cfg.db_source.to_string(),
    };
    let csv = table.to_csv(&prov);
    match &cli.out {
        Some(p) => std::fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{csv}"),
    }
    if let Some(p) = &cli.json {
        let text = serde_json::to_string_pretty(&table.to_json(&prov))?;
        std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(status)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ValidationError>().is_some() || err.downcast_ref::<clap::Error>().is_some() {
        return 2;
    }
    match err.downcast_ref::<casimir_fp::Error>() {
        Some(casimir_fp::Error::NonConvergence { .. }) => 3,
        Some(casimir_fp::Error::Io { .. }) | None => 1,
        // the remaining core errors all reject their inputs
        Some(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(status) => {
            let (code, what) = match status {
                Status::NoEquilibrium => (4, "no stable equilibrium in the bracket"),
                Status::NonConvergence => (3, "numerical integration did not converge"),
                _ => (1, "some sweep points failed"),
            };
            eprintln!("casimir-fp: {what}");
            ExitCode::from(code)
        }
        Err(err) => {
            eprintln!("casimir-fp: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
