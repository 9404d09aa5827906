//! The study drivers: rent sensitivity, capacity-blocking levels with both
//! selection rules, reserved-interconnector-capacity fractions, and the
//! Monte Carlo timing harness. Sweep points are independent solves and run
//! on a small scoped thread pool; results merge deterministically by index.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use super::knee::{select_blocking_m1, select_blocking_m2, BlockSelection};
use super::study::{run_scenario, Scenario, StudyData, StudyError};
use super::Metrics;
use crate::milp::BlockingSpec;
use crate::solver::BnbConfig;

fn check_axis(axis: &[f64]) -> Result<(), StudyError> {
    for (i, pair) in axis.windows(2).enumerate() {
        if pair[1] <= pair[0] {
            return Err(StudyError::AxisNotIncreasing(i + 1));
        }
    }
    Ok(())
}

/// Index-parallel map with deterministic output order.
fn parallel_map<T, F>(count: usize, f: F) -> Vec<Result<T, StudyError>>
where
    T: Send,
    F: Fn(usize) -> Result<T, StudyError> + Sync,
{
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(count)
        .max(1);
    if threads == 1 {
        return (0..count).map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<Result<T, StudyError>>>> =
        (0..count).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let out = f(i);
                *results[i].lock().unwrap() = Some(out);
            });
        }
    });
    results
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .unwrap()
                .expect("worker filled every slot")
        })
        .collect()
}

/// One rent grid point: indices for the three scenarios (C3 present only
/// when the study has an envelope source).
#[derive(Debug, Clone, Serialize)]
pub struct RentSweepPoint {
    pub rent: f64,
    pub c1: Metrics,
    pub c2: Metrics,
    pub c3: Option<Metrics>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RentSweep {
    pub points: Vec<RentSweepPoint>,
}

impl RentSweep {
    /// Wide CSV, one row per rent level.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "rent,c1_revenue,c1_cycles,c1_spp,c2_revenue,c2_cycles,c2_spp,c3_revenue,c3_cycles,c3_spp\n",
        );
        for p in &self.points {
            let c3 = p.c3.as_ref();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                p.rent,
                p.c1.revenue_eur,
                p.c1.cycles_100dod,
                p.c1.spp_years,
                p.c2.revenue_eur,
                p.c2.cycles_100dod,
                p.c2.spp_years,
                c3.map_or(String::new(), |m| m.revenue_eur.to_string()),
                c3.map_or(String::new(), |m| m.cycles_100dod.to_string()),
                c3.map_or(String::new(), |m| m.spp_years.to_string()),
            ));
        }
        out
    }

    /// Long-format CSV (`rent,scenario,metric,value`) for external plotting.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("rent,scenario,metric,value\n");
        let mut push = |rent: f64, scenario: &str, metrics: &Metrics| {
            for (name, value) in [
                ("revenue_eur", metrics.revenue_eur),
                ("cycles_100dod", metrics.cycles_100dod),
                ("spp_years", metrics.spp_years),
                ("cycles_to_payback", metrics.cycles_to_payback),
            ] {
                out.push_str(&format!("{rent},{scenario},{name},{value}\n"));
            }
        };
        for p in &self.points {
            push(p.rent, "C1", &p.c1);
            push(p.rent, "C2", &p.c2);
            if let Some(c3) = &p.c3 {
                push(p.rent, "C3", c3);
            }
        }
        out
    }
}

/// Solves C1 once (it does not see the interconnector) and C2/C3 per rent
/// level.
pub fn sweep_rent(
    data: &StudyData,
    rents: &[f64],
    cfg: &BnbConfig,
) -> Result<RentSweep, StudyError> {
    check_axis(rents)?;
    let c1 = run_scenario(data, Scenario::C1, cfg)?.metrics;
    let has_c3 = data.envelope.is_some() || data.flows.is_some();
    let outcomes = parallel_map(rents.len(), |i| {
        let point = data.clone().with_rent(rents[i]);
        let c2 = run_scenario(&point, Scenario::C2, cfg)?.metrics;
        let c3 = if has_c3 {
            Some(run_scenario(&point, Scenario::C3, cfg)?.metrics)
        } else {
            None
        };
        Ok((c2, c3))
    });
    let mut points = Vec::with_capacity(rents.len());
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let (c2, c3) = outcome.map_err(|e| StudyError::AtPoint {
            axis: rents[i],
            source: Box::new(e),
        })?;
        points.push(RentSweepPoint {
            rent: rents[i],
            c1: c1.clone(),
            c2,
            c3,
        });
    }
    Ok(RentSweep { points })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockingSweepPoint {
    pub b_block: f64,
    pub revenue_eur: f64,
    pub spp_years: f64,
    pub cycles_100dod: f64,
    pub cycles_to_payback: f64,
}

/// Blocking sweep for one scenario, with both selection rules applied to
/// the resulting payback curve.
#[derive(Debug, Clone, Serialize)]
pub struct BlockingSweep {
    pub scenario: Scenario,
    pub points: Vec<BlockingSweepPoint>,
    pub m1_knee: BlockSelection,
    pub m2_calendar: BlockSelection,
}

impl BlockingSweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("b_block,revenue,spp_years,cycles_100dod,cycles_to_payback\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.b_block, p.revenue_eur, p.spp_years, p.cycles_100dod, p.cycles_to_payback
            ));
        }
        out
    }
}

/// Sweeps symmetric capacity blocking over `blocks` (MWh) for a scenario.
pub fn sweep_blocking(
    data: &StudyData,
    scenario: Scenario,
    blocks: &[f64],
    cfg: &BnbConfig,
) -> Result<BlockingSweep, StudyError> {
    check_axis(blocks)?;
    let outcomes = parallel_map(blocks.len(), |i| {
        let spec = BlockingSpec::symmetric(&data.battery, blocks[i]);
        spec.validate(&data.battery)?;
        let point = data.clone().with_blocking(spec);
        let m = run_scenario(&point, scenario, cfg)?.metrics;
        Ok(BlockingSweepPoint {
            b_block: blocks[i],
            revenue_eur: m.revenue_eur,
            spp_years: m.spp_years,
            cycles_100dod: m.cycles_100dod,
            cycles_to_payback: m.cycles_to_payback,
        })
    });
    let mut points = Vec::with_capacity(blocks.len());
    for (i, outcome) in outcomes.into_iter().enumerate() {
        points.push(outcome.map_err(|e| StudyError::AtPoint {
            axis: blocks[i],
            source: Box::new(e),
        })?);
    }
    let spps: Vec<f64> = points.iter().map(|p| p.spp_years).collect();
    let m1_knee = select_blocking_m1(blocks, &spps);
    let m2_calendar = select_blocking_m2(blocks, &spps, data.battery.calendar_life_years);
    Ok(BlockingSweep {
        scenario,
        points,
        m1_knee,
        m2_calendar,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReservedSweepPoint {
    pub fraction: f64,
    pub reserved_mwh: f64,
    pub revenue_c3: f64,
    /// Revenue increase over the local-only baseline, in percent.
    pub marginal_increase_pct: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReservedSweep {
    pub baseline_revenue_c1: f64,
    pub points: Vec<ReservedSweepPoint>,
}

impl ReservedSweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,reserved_mwh,revenue_c3,marginal_increase_pct\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.fraction, p.reserved_mwh, p.revenue_c3, p.marginal_increase_pct
            ));
        }
        out
    }
}

/// Sweeps the reserved fraction of the ramp limit and reports the marginal
/// revenue increase of C3 over the local-only baseline.
pub fn sweep_reserved(
    data: &StudyData,
    fractions: &[f64],
    cfg: &BnbConfig,
) -> Result<ReservedSweep, StudyError> {
    check_axis(fractions)?;
    let baseline = run_scenario(data, Scenario::C1, cfg)?.metrics.revenue_eur;
    if baseline <= 1e-9 {
        return Err(StudyError::NonPositiveBaseline(baseline));
    }
    let ramp = data.battery.x_min().abs().max(data.battery.x_max());
    let outcomes = parallel_map(fractions.len(), |i| {
        let reserved = fractions[i] * ramp;
        let point = data.clone().with_reserved(reserved);
        let m = run_scenario(&point, Scenario::C3, cfg)?.metrics;
        Ok(ReservedSweepPoint {
            fraction: fractions[i],
            reserved_mwh: reserved,
            revenue_c3: m.revenue_eur,
            marginal_increase_pct: 100.0 * (m.revenue_eur - baseline) / baseline,
        })
    });
    let mut points = Vec::with_capacity(fractions.len());
    for (i, outcome) in outcomes.into_iter().enumerate() {
        points.push(outcome.map_err(|e| StudyError::AtPoint {
            axis: fractions[i],
            source: Box::new(e),
        })?);
    }
    Ok(ReservedSweep {
        baseline_revenue_c1: baseline,
        points,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingStats {
    pub runs: usize,
    pub median_s: f64,
    pub q1_s: f64,
    pub q3_s: f64,
    pub min_s: f64,
    pub max_s: f64,
    pub samples_s: Vec<f64>,
}

/// Monte Carlo solve-time distribution. Each run bootstraps the day
/// ordering (days resampled with replacement) of prices and flows, then
/// times one scenario solve.
pub fn timing_harness(
    data: &StudyData,
    scenario: Scenario,
    runs: usize,
    seed: u64,
    cfg: &BnbConfig,
) -> Result<TimingStats, StudyError> {
    assert!(runs >= 1);
    let days = data.horizon() / 24;
    if days == 0 || !data.horizon().is_multiple_of(24) {
        return Err(StudyError::PartialDays(data.horizon()));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(runs);
    for _ in 0..runs {
        let order: Vec<usize> = (0..days).map(|_| rng.random_range(0..days)).collect();
        let resample = |series: &[f64]| -> Vec<f64> {
            let mut out = Vec::with_capacity(series.len());
            for &d in &order {
                out.extend_from_slice(&series[24 * d..24 * (d + 1)]);
            }
            out
        };
        let mut run_data = data.clone();
        run_data.price_a = resample(&data.price_a);
        run_data.price_b = resample(&data.price_b);
        run_data.flows = data.flows.as_ref().map(|f| resample(f));
        run_data.envelope = data
            .envelope
            .as_ref()
            .map(|env| crate::envelope::OperatingEnvelope {
                x_min_adj: resample(&env.x_min_adj),
                x_max_adj: resample(&env.x_max_adj),
            });
        let start = Instant::now();
        run_scenario(&run_data, scenario, cfg)?;
        samples.push(start.elapsed().as_secs_f64());
    }
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let quantile = |q: f64| -> f64 {
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let t = pos - lo as f64;
        sorted[lo] * (1.0 - t) + sorted[hi] * t
    };
    Ok(TimingStats {
        runs,
        median_s: quantile(0.5),
        q1_s: quantile(0.25),
        q3_s: quantile(0.75),
        min_s: sorted[0],
        max_s: sorted[sorted.len() - 1],
        samples_s: samples,
    })
}
