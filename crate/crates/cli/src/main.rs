//! `svi-attention`: runs the attention studies on a directory of input files,
//! or generates a synthetic one.
//!
//! Exit status: 0 on success, 1 when the data or an estimator fails, 2 on a
//! usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig, UsageError};

#[derive(Parser)]
#[command(name = "svi-attention", version, about = "Search-volume attention studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Correlation of search volume with other attention proxies (table_2).
    Correlate,
    /// Per-ticker VAR(1) lead-lag with block-bootstrap p-values (table_3).
    VarLeadlag,
    /// Retail order flow on search volume changes (table_4).
    Retail,
    /// Fama-MacBeth regressions of forward returns on ASVI (table_5, or table_6 with --drop-noise).
    PricePressure,
    /// IPO attention profile and high/low ASVI day-one returns (table_7, fig4-6 series).
    IpoEvent,
    /// Cross-sectional day-one IPO regressions (table_8).
    IpoCross,
    /// Attention panel and per-IPO metrics as CSV.
    Metrics,
    /// Write a synthetic input directory with planted effects.
    Synth,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Correlate => "correlate",
            Command::VarLeadlag => "var-leadlag",
            Command::Retail => "retail",
            Command::PricePressure => "price-pressure",
            Command::IpoEvent => "ipo-event",
            Command::IpoCross => "ipo-cross",
            Command::Metrics => "metrics",
            Command::Synth => "synth",
        }
    }
}

#[derive(Args)]
struct Flags {
    /// Directory holding svi.csv, market.csv and the other input files.
    #[arg(long, global = true, value_name = "DIR")]
    input: Option<PathBuf>,
    /// 2004-2008, 2009-2019, all, or START..END dates.
    #[arg(long, global = true)]
    period: Option<String>,
    /// Remove noise tickers before the price-pressure regressions.
    #[arg(long, global = true)]
    drop_noise: bool,
    /// Newey-West lags for Fama-MacBeth errors [default: 4].
    #[arg(long, global = true)]
    nw_lags: Option<usize>,
    /// Moving-block length in weeks [default: 23].
    #[arg(long, global = true)]
    block_len: Option<usize>,
    /// Bootstrap replicates [default: 1000].
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Seed for the bootstrap and the generator [default: 20110901].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it [default: all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory [default: out].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// csv or text [default: csv].
    #[arg(long, global = true)]
    format: Option<String>,
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Retail order sizes: 100-1999 or 100-9999 [default: 100-1999].
    #[arg(long, global = true)]
    size_group: Option<String>,
    /// Retail standard errors: hc1 or ols [default: hc1].
    #[arg(long, global = true)]
    se: Option<String>,
    /// Retail order and volume changes: log or arith [default: log].
    #[arg(long, global = true)]
    delta: Option<String>,
    /// Generator: number of tickers [default: 300].
    #[arg(long, global = true)]
    tickers: Option<usize>,
    /// Generator: number of weeks [default: 260].
    #[arg(long, global = true)]
    weeks: Option<usize>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            input: self.input.clone(),
            period: self.period.clone(),
            drop_noise: self.drop_noise,
            nw_lags: self.nw_lags,
            block_len: self.block_len,
            reps: self.reps,
            seed: self.seed,
            threads: self.threads,
            out: self.out.clone(),
            format: self.format.clone(),
            size_group: self.size_group.clone(),
            se: self.se.clone(),
            delta: self.delta.clone(),
            tickers: self.tickers,
            weeks: self.weeks,
        }
    }
}

fn run(command: Command, cfg: &RunConfig) -> anyhow::Result<()> {
    match command {
        Command::Correlate => commands::correlate(cfg),
        Command::VarLeadlag => commands::var_leadlag(cfg),
        Command::Retail => commands::retail(cfg),
        Command::PricePressure => commands::price_pressure(cfg),
        Command::IpoEvent => commands::ipo_event(cfg),
        Command::IpoCross => commands::ipo_cross(cfg),
        Command::Metrics => commands::metrics(cfg),
        Command::Synth => commands::synth(cfg),
    }
}

fn usage(command: Option<Command>, e: &UsageError) -> ExitCode {
    let name = command.map(|c| format!(" {}", c.name())).unwrap_or_default();
    eprintln!("error: {e}\n\nFor more information, try 'svi-attention{name} --help'.");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    // clap exits with 2 on bad usage and 0 for --help.
    let cli = Cli::parse();
    let cfg = match RunConfig::resolve(cli.flags.config.as_deref(), &cli.flags.overrides()) {
        Ok(c) => c,
        Err(e) => return usage(Some(cli.command), &e),
    };
    if cfg.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
