//! `lagrange`: scan, curve and index tool for the elliptic Lagrangian orbits.
//!
//! Exit status: 0 success, 1 a verification criterion failed, 2 usage or
//! configuration error, 3 numerical or I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use lagrange_scan::commands;
use lagrange_scan::config::{ConfigError, ScanConfig};
use lagrange_scan::verify;

#[derive(Parser)]
#[command(name = "lagrange", version, about = "Linear stability of elliptic Lagrangian orbits")]
struct Cli {
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory (overrides out_dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// worker threads, 0 for all cores (overrides threads)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Fourier truncation N (overrides n_modes)
    #[arg(long, global = true)]
    n_modes: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the monodromy over the configured (beta, e) grid
    Scan,
    /// Trace the degeneracy and stability-boundary curves
    Curves,
    /// omega-index by the operator and path methods
    Index {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        e: f64,
        /// omega = exp(i theta)
        #[arg(long, allow_hyphen_values = true, default_value_t = std::f64::consts::PI)]
        omega_theta: f64,
    },
    /// Endpoint monodromy, spectrum and Krein signs at one point
    Monodromy {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        e: f64,
    },
    /// Run the acceptance checks, one JSON line each
    Verify {
        /// comma-separated criterion ids (default: all)
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

enum Failure {
    Usage(String),
    Numerical(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        if e.downcast_ref::<ConfigError>().is_some() {
            Failure::Usage(format!("{e:#}"))
        } else {
            Failure::Numerical(e)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ScanConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => ScanConfig::load(p).map_err(|e| Failure::Usage(e.to_string()))?,
        None => ScanConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(n) = cli.n_modes {
        cfg.n_modes = n;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let cfg = load_config(&cli)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.cmd {
        Cmd::Scan => {
            let r = commands::cmd_scan(&cfg)?;
            print!("{}", r.summary());
            Ok(true)
        }
        Cmd::Curves => {
            let r = commands::cmd_curves(&cfg)?;
            print!("{}", r.summary());
            if r.partial() {
                eprintln!("warning: some curve tables are partial, see curves_notes.txt");
            }
            Ok(true)
        }
        Cmd::Index { beta, e, omega_theta } => {
            let r = commands::cmd_index(&cfg, beta, e, omega_theta)?;
            print!("{}", r.text);
            Ok(true)
        }
        Cmd::Monodromy { beta, e } => {
            print!("{}", commands::cmd_monodromy(&cfg, beta, e)?);
            Ok(true)
        }
        Cmd::Verify { only } => {
            let ids = if only.is_empty() { verify::all_ids() } else { only };
            if let Some(bad) = ids.iter().find(|&&id| !verify::all_ids().contains(&id)) {
                return Err(Failure::Usage(format!("unknown criterion {bad}")));
            }
            let reports = commands::cmd_verify(&cfg, &ids)?;
            let failed: Vec<u32> = reports.iter().filter(|r| !r.pass).map(|r| r.id).collect();
            if !failed.is_empty() {
                eprintln!("failed criteria: {failed:?}");
            }
            Ok(failed.is_empty())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
