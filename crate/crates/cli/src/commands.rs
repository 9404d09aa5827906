//! The five subcommands: solve, sweep, dispatch, clean-data and export-mps.
//! Every output file carries the hash of the configuration (or input) it
//! was produced from.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use interarb::analytics::{
    run_scenario, scenario_envelope, sweep_blocking, sweep_rent, sweep_reserved, Scenario,
    ScenarioOutcome, StudyError,
};
use interarb::battery::PriceSet;
use interarb::dispatch::{extract_flows, DispatchError};
use interarb::ingest::{
    clamp_negative_prices, clean_series, convert_currency, load_series, SeriesSchema, Unit,
};
use interarb::milp::build_pmilp;
use interarb::solver::mps;
use interarb::solver::MilpStatus;

use crate::config::{config_hash, StudyConfig};
use crate::pipeline::{build_study_data, load_study_series, run_dispatch, timestamps};

/// Failure modes with their process exit codes: 2 infeasible, 3 solver
/// limit, 4 configuration or data trouble.
#[derive(Debug)]
pub enum CmdError {
    Infeasible(String),
    Limit(String),
    Other(anyhow::Error),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Infeasible(_) => 2,
            CmdError::Limit(_) => 3,
            CmdError::Other(_) => 4,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CmdError::Infeasible(m) | CmdError::Limit(m) => m.clone(),
            CmdError::Other(e) => format!("{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CmdError {
    fn from(e: anyhow::Error) -> Self {
        CmdError::Other(e)
    }
}

fn study_error(e: StudyError) -> CmdError {
    fn unwrap_point(e: &StudyError) -> &StudyError {
        match e {
            StudyError::AtPoint { source, .. } => unwrap_point(source),
            other => other,
        }
    }
    match unwrap_point(&e) {
        StudyError::NotOptimal { status, .. } => match status {
            MilpStatus::Infeasible => CmdError::Infeasible(e.to_string()),
            MilpStatus::Limit => CmdError::Limit(e.to_string()),
            _ => CmdError::Other(anyhow::anyhow!(e.to_string())),
        },
        _ => CmdError::Other(anyhow::anyhow!(e.to_string())),
    }
}

fn write_csv(path: &Path, hash: &str, body: &str) -> Result<()> {
    let text = format!("# config_hash={hash}\n{body}");
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing JSON")?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn outcome_json(cfg: &StudyConfig, outcome: &ScenarioOutcome) -> serde_json::Value {
    json!({
        "config_hash": cfg.config_hash,
        "scenario": outcome.scenario,
        "objective_eur": outcome.solution.objective,
        "revenue_eur": outcome.metrics.revenue_eur,
        "revenue_split": outcome.split,
        "metrics": outcome.metrics,
        "solver": {
            "nodes": outcome.nodes,
            "simplex_iterations": outcome.simplex_iterations,
        },
    })
}

/// `solve`: one scenario end to end; writes trajectory, metrics, solver log
/// and (for C3) the operating envelope.
pub fn cmd_solve(config_path: &Path, cfg: StudyConfig) -> Result<(), CmdError> {
    let _ = config_path;
    let series = load_study_series(&cfg)?;
    let data = build_study_data(&cfg, &series)?;
    let outcome = run_scenario(&data, cfg.scenario, &cfg.bnb_config()).map_err(study_error)?;

    let out = cfg.output_dir();
    ensure_out_dir(&out)?;
    write_csv(
        &out.join("trajectory.csv"),
        &cfg.config_hash,
        &outcome.solution.to_csv(),
    )?;
    write_json(&out.join("metrics.json"), &outcome_json(&cfg, &outcome))?;
    let mut log = format!("# config_hash={}\n", cfg.config_hash);
    for line in &outcome.solver_log {
        log.push_str(line);
        log.push('\n');
    }
    std::fs::write(out.join("solver.log"), log)
        .with_context(|| format!("writing {}", out.join("solver.log").display()))?;
    if cfg.scenario == Scenario::C3 {
        let env = scenario_envelope(&data, Scenario::C3).map_err(study_error)?;
        let ts = timestamps(&series.days);
        write_csv(
            &out.join("envelope.csv"),
            &cfg.config_hash,
            &env.to_csv(Some(&ts)),
        )?;
    }
    println!(
        "{:?}: objective {:.4} EUR, revenue {:.4} EUR, cycles {:.3}, SPP {:.2} y ({} nodes)",
        cfg.scenario,
        outcome.solution.objective,
        outcome.metrics.revenue_eur,
        outcome.metrics.cycles_100dod,
        outcome.metrics.spp_years,
        outcome.nodes
    );
    println!("outputs in {}", out.display());
    Ok(())
}

/// Axis specification for `sweep`.
pub struct SweepAxis {
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn from_args(
        from: Option<f64>,
        to: Option<f64>,
        step: Option<f64>,
        values: Option<String>,
    ) -> Result<Self> {
        if let Some(list) = values {
            let mut parsed = Vec::new();
            for tok in list.split(',') {
                parsed.push(
                    tok.trim()
                        .parse::<f64>()
                        .with_context(|| format!("bad axis value {tok:?}"))?,
                );
            }
            if parsed.is_empty() {
                bail!("empty axis value list");
            }
            return Ok(SweepAxis { values: parsed });
        }
        let (from, to, step) = match (from, to, step) {
            (Some(f), Some(t), Some(s)) if s > 0.0 && t >= f => (f, t, s),
            _ => bail!("axis needs --values or --from/--to/--step with step > 0"),
        };
        let mut values = Vec::new();
        let mut v = from;
        let mut k = 0u32;
        while v <= to + 1e-12 {
            values.push(v);
            k += 1;
            v = from + step * k as f64;
        }
        Ok(SweepAxis { values })
    }
}

/// `sweep`: rent, blocking or reserved-capacity studies with CSV/JSON
/// outputs.
pub fn cmd_sweep(cfg: StudyConfig, kind: &str, axis: SweepAxis) -> Result<(), CmdError> {
    let series = load_study_series(&cfg)?;
    let data = build_study_data(&cfg, &series)?;
    let bnb = cfg.bnb_config();
    let out = cfg.output_dir();
    ensure_out_dir(&out)?;
    match kind {
        "rent" => {
            let sweep = sweep_rent(&data, &axis.values, &bnb).map_err(study_error)?;
            write_csv(
                &out.join("rent_sweep.csv"),
                &cfg.config_hash,
                &sweep.to_csv(),
            )?;
            write_csv(
                &out.join("rent_sweep_long.csv"),
                &cfg.config_hash,
                &sweep.to_long_csv(),
            )?;
            println!(
                "rent sweep: {} points written to {}",
                sweep.points.len(),
                out.display()
            );
        }
        "blocking" => {
            if !matches!(cfg.scenario, Scenario::C2 | Scenario::C3) {
                return Err(CmdError::Other(anyhow::anyhow!(
                    "blocking sweeps need scenario C2 or C3, got {:?}",
                    cfg.scenario
                )));
            }
            let sweep =
                sweep_blocking(&data, cfg.scenario, &axis.values, &bnb).map_err(study_error)?;
            write_csv(
                &out.join("blocking_sweep.csv"),
                &cfg.config_hash,
                &sweep.to_csv(),
            )?;
            write_json(
                &out.join("blocking_selection.json"),
                &json!({
                    "config_hash": cfg.config_hash,
                    "scenario": sweep.scenario,
                    "m1_knee": sweep.m1_knee,
                    "m2_calendar": sweep.m2_calendar,
                }),
            )?;
            println!(
                "blocking sweep: {} points; knee at {:.4} MWh, calendar-life level {:.4} MWh",
                sweep.points.len(),
                sweep.m1_knee.b_block,
                sweep.m2_calendar.b_block
            );
        }
        "reserved" => {
            let sweep = sweep_reserved(&data, &axis.values, &bnb).map_err(study_error)?;
            write_csv(
                &out.join("reserved_sweep.csv"),
                &cfg.config_hash,
                &sweep.to_csv(),
            )?;
            println!(
                "reserved sweep: {} points, baseline revenue {:.4} EUR",
                sweep.points.len(),
                sweep.baseline_revenue_c1
            );
        }
        other => {
            return Err(CmdError::Other(anyhow::anyhow!(
                "unknown sweep kind {other:?} (rent, blocking, reserved)"
            )))
        }
    }
    Ok(())
}

/// `dispatch`: clears the three-node market and writes prices and flows in
/// formats the solve command can consume directly.
pub fn cmd_dispatch(cfg: StudyConfig) -> Result<(), CmdError> {
    let series = load_study_series(&cfg)?;
    let derived = match run_dispatch(&cfg, &series) {
        Ok(d) => d,
        Err(e) => {
            return Err(match e.downcast_ref::<DispatchError>() {
                Some(DispatchError::InfeasibleHour { hour }) => {
                    CmdError::Infeasible(format!("dispatch infeasible at hour {hour}"))
                }
                _ => CmdError::Other(e),
            })
        }
    };
    let out = cfg.output_dir();
    ensure_out_dir(&out)?;
    let ts = timestamps(&series.days);

    let mut prices = String::from("timestamp,lambda_be,lambda_ei,lambda_uk\n");
    for (h, t) in ts.iter().enumerate() {
        let _ = writeln!(
            prices,
            "{},{},{},{}",
            t.format("%Y-%m-%dT%H:%M:%SZ"),
            derived.result.prices[0][h],
            derived.result.prices[1][h],
            derived.result.prices[2][h]
        );
    }
    write_csv(&out.join("dispatch_prices.csv"), &cfg.config_hash, &prices)?;

    let write_flow = |name: &str, flows: &[f64]| -> Result<()> {
        let mut body = String::from("timestamp,value\n");
        for (h, t) in ts.iter().enumerate() {
            let _ = writeln!(body, "{},{}", t.format("%Y-%m-%dT%H:%M:%SZ"), flows[h]);
        }
        write_csv(&out.join(name), &cfg.config_hash, &body)
    };
    for line in &derived.case.lines {
        let flows = extract_flows(&derived.result, &derived.case, &line.name)
            .map_err(|e| CmdError::Other(e.into()))?;
        write_flow(&format!("flows_{}.csv", line.name), &flows)?;
    }
    write_flow("flows_be_side.csv", &derived.be_flows)?;
    write_flow("flows_uk_side.csv", &derived.uk_flows)?;

    write_json(
        &out.join("dispatch_summary.json"),
        &json!({
            "config_hash": cfg.config_hash,
            "hours": ts.len(),
            "total_cost_eur": derived.result.total_cost,
            "tied_hours": derived.result.tied_hours,
            "be_side_capacity_mw": derived.be_capacity,
            "uk_side_capacity_mw": derived.uk_capacity,
        }),
    )?;
    println!(
        "dispatch: {} hours cleared, total cost {:.2} EUR, {} tied hours; outputs in {}",
        ts.len(),
        derived.result.total_cost,
        derived.result.tied_hours.len(),
        out.display()
    );
    Ok(())
}

/// `clean-data`: one series through the gap rules, with optional currency
/// conversion and negative-price clamping.
#[allow(clippy::too_many_arguments)]
pub fn cmd_clean_data(
    input: &Path,
    unit_text: &str,
    output: &Path,
    report_path: &Path,
    clamp: bool,
    gbp_to_eur: Option<f64>,
) -> Result<(), CmdError> {
    let unit = Unit::parse(unit_text).map_err(|e| CmdError::Other(anyhow::anyhow!("{e}")))?;
    let bytes = std::fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let hash = config_hash(&bytes);
    let name = input
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "series".to_string());
    let raw = load_series(input, &SeriesSchema::new(&name, unit))
        .map_err(|e| CmdError::Other(anyhow::anyhow!("{e}")))?;
    let (mut clean, mut report) =
        clean_series(&raw).map_err(|e| CmdError::Other(anyhow::anyhow!("{e}")))?;
    if let Some(factor) = gbp_to_eur {
        clean = convert_currency(&clean, factor)
            .map_err(|e| CmdError::Other(anyhow::anyhow!("{e}")))?;
    }
    if clamp {
        let (clamped, count) =
            clamp_negative_prices(&clean).map_err(|e| CmdError::Other(anyhow::anyhow!("{e}")))?;
        clean = clamped;
        report.clamped_hours = count;
    }
    write_csv(output, &hash, &clean.to_csv())?;
    write_json(
        report_path,
        &json!({
            "input_hash": hash,
            "report": report,
        }),
    )?;
    println!(
        "{}: retained {} days, dropped {}, interpolated {} h, clamped {} h",
        name,
        report.retained_days,
        report.dropped_days,
        report.interpolated_hours,
        report.clamped_hours
    );
    Ok(())
}

/// `export-mps`: writes the assembled MILP of the configured scenario for
/// external-solver cross-checks.
pub fn cmd_export_mps(cfg: StudyConfig, out_file: Option<PathBuf>) -> Result<(), CmdError> {
    if cfg.scenario == Scenario::K1 {
        return Err(CmdError::Other(anyhow::anyhow!(
            "MPS export covers the mixed-integer scenarios (C1/C2/C3)"
        )));
    }
    let series = load_study_series(&cfg)?;
    let data = build_study_data(&cfg, &series)?;
    let envelope = scenario_envelope(&data, cfg.scenario).map_err(study_error)?;
    let prices =
        PriceSet::from_clearing_prices(&data.price_a, &data.price_b, data.rent, data.eta_line)
            .map_err(|e| CmdError::Other(anyhow::anyhow!("{e}")))?;
    let problem = build_pmilp(&prices, &data.battery, &envelope, &data.blocking)
        .map_err(|e| CmdError::Other(anyhow::anyhow!("{e}")))?;
    let path = match out_file {
        Some(p) => p,
        None => {
            let dir = cfg.output_dir();
            ensure_out_dir(&dir)?;
            dir.join("problem.mps")
        }
    };
    let name = format!("ARB_{:?}_{}", cfg.scenario, cfg.config_hash);
    mps::write_mps(&problem, &name, &path)
        .with_context(|| format!("writing {}", path.display()))?;
    println!(
        "wrote {} ({} rows, {} columns, {} binaries)",
        path.display(),
        problem.num_rows(),
        problem.num_cols(),
        problem.binary_idx().len()
    );
    Ok(())
}
