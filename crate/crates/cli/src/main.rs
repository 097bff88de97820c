mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Threshold;

/// Severity modelling and operational-risk capital from loss data.
#[derive(Debug, Parser)]
#[command(name = "snpcap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Loss file: one loss per row, optional header, optional `label` column.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Directory for output files (created if missing).
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Root seed; all randomness is derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flat TOML file with defaults for any of the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw the three-component synthetic loss sample and summarise its tails.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Use the built-in Weibull / Pareto / log-logistic mixture.
        #[arg(long)]
        paper_mixture: bool,
        /// Draws per component.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: Option<u64>,
    },
    /// Scan candidate body-tail thresholds by GPD goodness of fit.
    Threshold {
        #[command(flatten)]
        common: Common,
        /// Comma-separated candidates; default is the 70%..99% empirical quantiles.
        #[arg(long)]
        candidates: Option<String>,
        #[arg(long)]
        min_tail: Option<usize>,
        /// Bootstrap replications for p-values at the selected threshold.
        #[arg(long)]
        bootstrap: Option<usize>,
    },
    /// Fit kernels and SNP ladders to tail exceedances.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Comma-separated kernel families (default: all six).
        #[arg(long)]
        families: Option<String>,
        /// Smallest SNP truncation point listed in the comparison table.
        #[arg(long = "Kmin")]
        kmin: Option<usize>,
        /// Largest SNP truncation point fitted.
        #[arg(long = "Kmax")]
        kmax: Option<usize>,
        /// Level of the ladder's likelihood-ratio steps.
        #[arg(long)]
        alpha: Option<f64>,
        /// Body-tail threshold or `auto`; omit when the input already holds exceedances.
        #[arg(long)]
        bt: Option<Threshold>,
    },
    /// Spliced severity, Poisson frequencies and Monte Carlo VaR at 99.9%.
    Capital {
        #[command(flatten)]
        common: Common,
        /// Reporting threshold (smallest recorded loss).
        #[arg(long)]
        rt: Option<f64>,
        /// Body-tail threshold or `auto`.
        #[arg(long)]
        bt: Option<Threshold>,
        /// Observation window in years.
        #[arg(long)]
        years: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Comma-separated tail models, e.g. `gpd,SNPLGN3p`.
        #[arg(long)]
        models: Option<String>,
        /// Override the fitted annual body frequency.
        #[arg(long)]
        lambda_body: Option<f64>,
        /// Override the fitted annual tail frequency.
        #[arg(long)]
        lambda_tail: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Simulate { common, paper_mixture, n } => commands::simulate(&common, paper_mixture, n.map(|v| v as usize)),
        Command::Threshold { common, candidates, min_tail, bootstrap } => {
            commands::threshold(&common, candidates, min_tail, bootstrap)
        }
        Command::Fit { common, families, kmin, kmax, alpha, bt } => {
            commands::fit(&common, commands::FitArgs { families, kmin, kmax, alpha, bt })
        }
        Command::Capital { common, rt, bt, years, iterations, models, lambda_body, lambda_tail } => commands::capital(
            &common,
            commands::CapitalArgs { rt, bt, years, iterations, models, lambda_body, lambda_tail },
        ),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
