use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use interarb_cli::commands::{
    cmd_clean_data, cmd_dispatch, cmd_export_mps, cmd_solve, cmd_sweep, CmdError, SweepAxis,
};
use interarb_cli::config::StudyConfig;

/// Multi-market battery arbitrage studies: data cleaning, interconnector
/// envelopes, exact MILP optimization, dispatch-simulated prices and
/// profitability sweeps.
#[derive(Parser)]
#[command(name = "interarb", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write trajectory, metrics and solver log.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured scenario (C1, C2, C3, K1).
        #[arg(long)]
        scenario: Option<String>,
        /// Override the interconnector rent (EUR/MWh).
        #[arg(long)]
        rent: Option<f64>,
        /// Override the blocked battery energy (MWh).
        #[arg(long)]
        blocking: Option<f64>,
        /// Override the first study day (inclusive, ISO date).
        #[arg(long)]
        start: Option<chrono::NaiveDate>,
        /// Override the end study day (exclusive, ISO date).
        #[arg(long)]
        end: Option<chrono::NaiveDate>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a rent, blocking or reserved-capacity sweep.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Sweep kind: rent, blocking or reserved.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Comma-separated axis values (alternative to from/to/step).
        #[arg(long)]
        values: Option<String>,
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clear the three-node market and export prices and flows.
    Dispatch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clean one hourly series file (gap rules, conversion, clamping).
    CleanData {
        #[arg(long)]
        input: PathBuf,
        /// Unit of the series: EUR/MWh, GBP/MWh, MW or MWh.
        #[arg(long)]
        unit: String,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Saturate negative prices at zero.
        #[arg(long)]
        clamp_negative: bool,
        /// Convert GBP/MWh to EUR/MWh at this factor first.
        #[arg(long)]
        gbp_to_eur: Option<f64>,
    },
    /// Export the assembled MILP as an MPS file.
    ExportMps {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn apply_overrides(
    cfg: &mut StudyConfig,
    scenario: Option<String>,
    rent: Option<f64>,
    blocking: Option<f64>,
    start: Option<chrono::NaiveDate>,
    end: Option<chrono::NaiveDate>,
    out: Option<PathBuf>,
) -> Result<(), CmdError> {
    if let Some(s) = scenario {
        cfg.scenario = s
            .parse()
            .map_err(|e: String| CmdError::Other(anyhow::anyhow!(e)))?;
    }
    if let Some(r) = rent {
        cfg.file.market.rent_eur_per_mwh = r;
    }
    if let Some(b) = blocking {
        cfg.file.study.blocking_mwh = b;
    }
    if start.is_some() {
        cfg.file.study.start = start;
    }
    if end.is_some() {
        cfg.file.study.end = end;
    }
    if let Some(dir) = out {
        cfg.file.output.dir = dir.display().to_string();
    }
    Ok(())
}

fn run() -> Result<(), CmdError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve {
            config,
            scenario,
            rent,
            blocking,
            start,
            end,
            out,
        } => {
            let mut cfg = StudyConfig::load(&config)?;
            apply_overrides(&mut cfg, scenario, rent, blocking, start, end, out)?;
            cmd_solve(&config, cfg)
        }
        Command::Sweep {
            config,
            kind,
            from,
            to,
            step,
            values,
            scenario,
            out,
        } => {
            let mut cfg = StudyConfig::load(&config)?;
            apply_overrides(&mut cfg, scenario, None, None, None, None, out)?;
            let axis = SweepAxis::from_args(from, to, step, values)?;
            cmd_sweep(cfg, &kind, axis)
        }
        Command::Dispatch { config, out } => {
            let mut cfg = StudyConfig::load(&config)?;
            apply_overrides(&mut cfg, None, None, None, None, None, out)?;
            cmd_dispatch(cfg)
        }
        Command::CleanData {
            input,
            unit,
            output,
            report,
            clamp_negative,
            gbp_to_eur,
        } => cmd_clean_data(&input, &unit, &output, &report, clamp_negative, gbp_to_eur),
        Command::ExportMps { config, out } => {
            let cfg = StudyConfig::load(&config)?;
            cmd_export_mps(cfg, out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
