//! Data assembly shared by the subcommands: series loading and cleaning,
//! day alignment, date-range selection and (for the two-sided test case)
//! the dispatch-simulated price/flow source.

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;

use interarb::analytics::StudyData;
use interarb::dispatch::{
    build_island_case, clear_market, side_flows, DispatchCase, DispatchResult, NodeId,
};
use interarb::envelope::{envelope_hoa, LinkState};
use interarb::ingest::{
    align_days, clamp_negative_prices, clean_series, convert_currency, load_series, CleanSeries,
    CleaningReport, SeriesSchema, Unit,
};

use crate::config::StudyConfig;

/// One cleaned, aligned study dataset, hourly over whole days.
pub struct LoadedSeries {
    pub days: Vec<NaiveDate>,
    pub price_a: Vec<f64>,
    pub price_b: Vec<f64>,
    pub flows: Option<Vec<f64>>,
    pub reports: Vec<CleaningReport>,
}

fn load_price(
    cfg: &StudyConfig,
    rel: &str,
    unit_text: &str,
    name: &str,
    reports: &mut Vec<CleaningReport>,
) -> Result<CleanSeries> {
    let unit = cfg.price_unit(unit_text)?;
    let path = cfg.resolve(rel);
    let raw = load_series(&path, &SeriesSchema::new(name, unit))
        .with_context(|| format!("loading {}", path.display()))?;
    let (clean, report) = clean_series(&raw)?;
    reports.push(report);
    let eur = match unit {
        Unit::GbpPerMwh => convert_currency(&clean, cfg.file.market.gbp_to_eur)?,
        Unit::EurPerMwh => clean,
        other => bail!("{name} must be a price series, got {other}"),
    };
    let (clamped, _) = clamp_negative_prices(&eur)?;
    Ok(clamped)
}

/// Loads, cleans, converts, clamps and day-aligns the study series.
pub fn load_study_series(cfg: &StudyConfig) -> Result<LoadedSeries> {
    let mut reports = Vec::new();
    let price_a = load_price(
        cfg,
        &cfg.file.data.price_a,
        &cfg.file.data.price_a_unit,
        "price_a",
        &mut reports,
    )?;
    let price_b = load_price(
        cfg,
        &cfg.file.data.price_b,
        &cfg.file.data.price_b_unit,
        "price_b",
        &mut reports,
    )?;
    let mut series = vec![price_a, price_b];
    if let Some(rel) = &cfg.file.data.flows {
        let path = cfg.resolve(rel);
        let raw = load_series(&path, &SeriesSchema::new("flows", Unit::Mw))
            .with_context(|| format!("loading {}", path.display()))?;
        let (clean, report) = clean_series(&raw)?;
        reports.push(report);
        series.push(clean);
    }
    let mut aligned = align_days(&series);
    if aligned[0].days.is_empty() {
        bail!("no complete days survive cleaning and alignment");
    }
    apply_date_range(&mut aligned, cfg.file.study.start, cfg.file.study.end)?;
    let flows = if aligned.len() > 2 {
        Some(aligned[2].values.clone())
    } else {
        None
    };
    Ok(LoadedSeries {
        days: aligned[0].days.clone(),
        price_a: aligned[0].values.clone(),
        price_b: aligned[1].values.clone(),
        flows,
        reports,
    })
}

fn apply_date_range(
    series: &mut [CleanSeries],
    start: Option<NaiveDate>,
    end: Option<NaiveDate>,
) -> Result<()> {
    if start.is_none() && end.is_none() {
        return Ok(());
    }
    for s in series.iter_mut() {
        let keep: Vec<usize> = s
            .days
            .iter()
            .enumerate()
            .filter(|(_, d)| start.is_none_or(|from| **d >= from) && end.is_none_or(|to| **d < to))
            .map(|(i, _)| i)
            .collect();
        if keep.is_empty() {
            bail!("date range selects no retained days");
        }
        let mut days = Vec::with_capacity(keep.len());
        let mut values = Vec::with_capacity(24 * keep.len());
        let mut flags = Vec::with_capacity(24 * keep.len());
        for &i in &keep {
            days.push(s.days[i]);
            values.extend_from_slice(&s.values[24 * i..24 * (i + 1)]);
            flags.extend_from_slice(&s.flags[24 * i..24 * (i + 1)]);
        }
        s.days = days;
        s.values = values;
        s.flags = flags;
    }
    Ok(())
}

/// Output of the dispatch-simulated market: zonal prices from the balance
/// duals and the aggregate side flows for the two-sided envelope.
pub struct DispatchDerived {
    pub case: DispatchCase,
    pub result: DispatchResult,
    pub price_a: Vec<f64>,
    pub price_b: Vec<f64>,
    pub be_flows: Vec<f64>,
    pub uk_flows: Vec<f64>,
    pub be_capacity: f64,
    pub uk_capacity: f64,
}

/// Runs the three-node clearing over the aligned horizon.
pub fn run_dispatch(cfg: &StudyConfig, series: &LoadedSeries) -> Result<DispatchDerived> {
    let section = cfg
        .file
        .dispatch
        .as_ref()
        .context("[dispatch] section required")?;
    let mut reports = Vec::new();
    let mut load = |rel: &str, name: &str| -> Result<CleanSeries> {
        let path = cfg.resolve(rel);
        let raw = load_series(&path, &SeriesSchema::new(name, Unit::Mw))
            .with_context(|| format!("loading {}", path.display()))?;
        let (clean, report) = clean_series(&raw)?;
        reports.push(report);
        Ok(clean)
    };
    let demand_a = load(&section.demand_a, "demand_a")?;
    let demand_b = load(&section.demand_b, "demand_b")?;
    let wind = load(&section.wind, "wind")?;

    // Restrict the dispatch inputs to the already-aligned study days.
    let pick = |s: &CleanSeries| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(series.days.len() * 24);
        for day in &series.days {
            match s.days.iter().position(|d| d == day) {
                Some(i) => out.extend_from_slice(&s.values[24 * i..24 * (i + 1)]),
                None => bail!("dispatch series {} misses day {day}", s.name),
            }
        }
        Ok(out)
    };
    let demand_a = pick(&demand_a)?;
    let demand_b = pick(&demand_b)?;
    let wind = pick(&wind)?;

    let case = build_island_case(
        &series.price_a,
        &series.price_b,
        &demand_a,
        &demand_b,
        &wind,
        section.block_size_mw,
        cfg.capacity_rule,
    )?;
    let result = clear_market(&case, 0..series.price_a.len())?;
    let (be_flows, be_capacity) = side_flows(&result, &case, NodeId::Be);
    let (uk_flows, uk_capacity) = side_flows(&result, &case, NodeId::Uk);
    Ok(DispatchDerived {
        price_a: result.prices[0].clone(),
        price_b: result.prices[2].clone(),
        be_flows,
        uk_flows,
        be_capacity,
        uk_capacity,
        case,
        result,
    })
}

/// Assembles the solver-facing study data per the configured envelope
/// source.
pub fn build_study_data(cfg: &StudyConfig, series: &LoadedSeries) -> Result<StudyData> {
    let mut data = StudyData::new(
        cfg.battery.clone(),
        series.price_a.clone(),
        series.price_b.clone(),
    );
    data.rent = cfg.file.market.rent_eur_per_mwh;
    data.eta_line = cfg.file.market.line_efficiency;
    data.l_max = cfg.file.market.line_capacity_mw;
    data.blocking = cfg.blocking();
    data.terminal_soc = cfg.file.study.terminal_soc;
    let ramp = cfg.battery.x_min().abs().max(cfg.battery.x_max());
    data.reserved = cfg.file.study.reserved_fraction * ramp;

    match cfg.file.study.envelope_source.as_str() {
        "flows-file" => {
            data.flows = series.flows.clone();
        }
        "dispatch-sim" => {
            let derived = run_dispatch(cfg, series)?;
            let be = LinkState::new(
                derived.be_capacity,
                derived.be_flows.clone(),
                cfg.file.market.line_efficiency,
            )?;
            let uk = LinkState::new(
                derived.uk_capacity,
                derived.uk_flows.clone(),
                cfg.file.market.line_efficiency,
            )?;
            data.envelope = Some(envelope_hoa(
                &be,
                &uk,
                cfg.battery.x_min(),
                cfg.battery.x_max(),
            )?);
            data.price_a = derived.price_a;
            data.price_b = derived.price_b;
        }
        other => bail!("unknown envelope source {other:?}"),
    }
    Ok(data)
}

/// Hourly UTC timestamps for the aligned days.
pub fn timestamps(days: &[NaiveDate]) -> Vec<chrono::DateTime<chrono::Utc>> {
    use chrono::TimeZone;
    days.iter()
        .flat_map(|d| {
            (0..24).map(|h| {
                chrono::Utc.from_utc_datetime(&d.and_hms_opt(h, 0, 0).expect("valid hour"))
            })
        })
        .collect()
}
