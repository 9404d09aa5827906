//! Study configuration: one TOML file wiring data files, market constants,
//! scenario selection and solver settings. All relative paths resolve
//! against `INTERARB_DATA_DIR` when set, else against the config file's
//! directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use serde::Deserialize;

use interarb::analytics::Scenario;
use interarb::battery::BatteryParams;
use interarb::dispatch::BlockCapacityRule;
use interarb::ingest::Unit;
use interarb::milp::BlockingSpec;
use interarb::solver::{BnbConfig, SimplexConfig};

pub const DATA_DIR_ENV: &str = "INTERARB_DATA_DIR";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfigFile {
    /// Path to the battery parameter file.
    pub battery: String,
    pub data: DataSection,
    #[serde(default)]
    pub market: MarketSection,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub dispatch: Option<DispatchSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub price_a: String,
    pub price_b: String,
    #[serde(default = "default_price_unit")]
    pub price_a_unit: String,
    #[serde(default = "default_price_unit")]
    pub price_b_unit: String,
    #[serde(default)]
    pub flows: Option<String>,
}

fn default_price_unit() -> String {
    "EUR/MWh".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketSection {
    pub rent_eur_per_mwh: f64,
    pub line_efficiency: f64,
    pub line_capacity_mw: f64,
    pub gbp_to_eur: f64,
}

impl Default for MarketSection {
    fn default() -> Self {
        MarketSection {
            rent_eur_per_mwh: 5.0,
            line_efficiency: 0.975,
            line_capacity_mw: 1000.0,
            gbp_to_eur: 1.16,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudySection {
    pub scenario: String,
    /// Inclusive first day (ISO date); unset keeps every aligned day.
    pub start: Option<NaiveDate>,
    /// Exclusive end day.
    pub end: Option<NaiveDate>,
    pub blocking_mwh: f64,
    /// Share of the blocked energy taken from the top of the range.
    pub blocking_top_share: f64,
    pub reserved_fraction: f64,
    pub terminal_soc: bool,
    pub envelope_source: String,
}

impl Default for StudySection {
    fn default() -> Self {
        StudySection {
            scenario: "C2".to_string(),
            start: None,
            end: None,
            blocking_mwh: 0.0,
            blocking_top_share: 0.5,
            reserved_fraction: 0.0,
            terminal_soc: false,
            envelope_source: "flows-file".to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispatchSection {
    pub demand_a: String,
    pub demand_b: String,
    pub wind: String,
    #[serde(default = "default_block_size")]
    pub block_size_mw: f64,
    #[serde(default = "default_capacity_rule")]
    pub capacity_rule: String,
}

fn default_block_size() -> f64 {
    1000.0
}

fn default_capacity_rule() -> String {
    "demand-minus-block".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub gap_tol: f64,
    pub integer_tol: f64,
    pub node_limit: u64,
    pub time_limit_s: Option<f64>,
    pub log: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            gap_tol: 1e-7,
            integer_tol: 1e-6,
            node_limit: 5_000_000,
            time_limit_s: None,
            log: true,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: "out".to_string(),
        }
    }
}

/// Loaded and validated study configuration with resolved paths.
#[derive(Debug)]
pub struct StudyConfig {
    pub file: StudyConfigFile,
    pub config_hash: String,
    pub base_dir: PathBuf,
    pub battery: BatteryParams,
    pub scenario: Scenario,
    pub capacity_rule: BlockCapacityRule,
}

/// 64-bit FNV-1a over the raw config bytes, printed as hex; stamped into
/// every output file so results trace back to their configuration.
pub fn config_hash(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

impl StudyConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes =
            std::fs::read(path).with_context(|| format!("reading config {}", path.display()))?;
        let file: StudyConfigFile =
            toml::from_str(std::str::from_utf8(&bytes).context("config is not valid UTF-8")?)
                .with_context(|| format!("parsing config {}", path.display()))?;
        let base_dir = match std::env::var_os(DATA_DIR_ENV) {
            Some(dir) => PathBuf::from(dir),
            None => path
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from(".")),
        };
        let scenario: Scenario = file
            .study
            .scenario
            .parse()
            .map_err(|e: String| anyhow::anyhow!(e))?;
        let capacity_rule = match file.dispatch.as_ref().map(|d| d.capacity_rule.as_str()) {
            None | Some("demand-minus-block") => BlockCapacityRule::DemandMinusBlock,
            Some("fixed-block") => BlockCapacityRule::FixedBlock,
            Some(other) => bail!("unknown capacity rule {other:?}"),
        };
        let battery_path = resolve(&base_dir, &file.battery);
        let battery = BatteryParams::from_config_file(&battery_path)
            .with_context(|| format!("loading battery file {}", battery_path.display()))?;
        if !(file.market.line_efficiency > 0.0 && file.market.line_efficiency <= 1.0) {
            bail!("line efficiency must lie in (0, 1]");
        }
        if file.study.envelope_source != "flows-file"
            && file.study.envelope_source != "dispatch-sim"
        {
            bail!(
                "unknown envelope source {:?} (expected flows-file or dispatch-sim)",
                file.study.envelope_source
            );
        }
        if scenario == Scenario::C3
            && file.study.envelope_source == "flows-file"
            && file.data.flows.is_none()
        {
            bail!("scenario C3 with envelope_source=flows-file requires data.flows");
        }
        if file.study.envelope_source == "dispatch-sim" && file.dispatch.is_none() {
            bail!("envelope_source=dispatch-sim requires a [dispatch] section");
        }
        Ok(StudyConfig {
            config_hash: config_hash(&bytes),
            battery,
            scenario,
            capacity_rule,
            base_dir,
            file,
        })
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        resolve(&self.base_dir, rel)
    }

    pub fn price_unit(&self, text: &str) -> Result<Unit> {
        Unit::parse(text).map_err(|e| anyhow::anyhow!(e.to_string()))
    }

    pub fn bnb_config(&self) -> BnbConfig {
        BnbConfig {
            integer_tol: self.file.solver.integer_tol,
            gap_tol: self.file.solver.gap_tol,
            node_limit: self.file.solver.node_limit,
            time_limit: self
                .file
                .solver
                .time_limit_s
                .map(std::time::Duration::from_secs_f64),
            simplex: SimplexConfig::default(),
            log: self.file.solver.log,
        }
    }

    pub fn blocking(&self) -> BlockingSpec {
        BlockingSpec::split(
            &self.battery,
            self.file.study.blocking_mwh,
            self.file.study.blocking_top_share,
        )
    }

    pub fn output_dir(&self) -> PathBuf {
        let dir = Path::new(&self.file.output.dir);
        if dir.is_absolute() {
            dir.to_path_buf()
        } else {
            self.base_dir.join(dir)
        }
    }
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
