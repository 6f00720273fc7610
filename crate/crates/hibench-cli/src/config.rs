//! Harness configuration: a TOML file with one `[[dataset]]` section per
//! dataset plus output, eval and selector sections.
//!
//! Loading resolves every optional field to its effective value — the
//! standard benchmark datasets carry their protocol defaults (horizon
//! grids, split ratios, targets) by name — validates the result, and keeps
//! it around so runs can echo the effective config verbatim.
//!
//! Relative dataset paths resolve against `HIBENCH_DATA_ROOT` when set,
//! otherwise against the config file's directory.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use hibench::baselines::Predictor;
use hibench::data::SplitSpec;
use hibench::metrics::VariateMode;
use hibench::report::TableFormat;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DATA_ROOT_ENV: &str = "HIBENCH_DATA_ROOT";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarnessConfig {
    pub output: OutputConfig,
    pub eval: EvalConfig,
    pub selector: SelectorSection,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: String,
    pub out_dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            format: "markdown".to_string(),
            out_dir: PathBuf::from("reports"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub predictors: Vec<String>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            predictors: vec!["hi".to_string()],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectorSection {
    pub acf_min_lag: usize,
    pub acf_max_lag: usize,
    pub acf_threshold: f64,
    pub alpha_grid: Vec<f64>,
    /// Base predictors competing with historical inertia;
    /// `seasonal_naive:auto` takes its period from period detection.
    pub candidates: Vec<String>,
}

impl Default for SelectorSection {
    fn default() -> Self {
        SelectorSection {
            acf_min_lag: 2,
            acf_max_lag: 512,
            acf_threshold: 0.3,
            alpha_grid: (0..=10).map(|k| k as f64 / 10.0).collect(),
            candidates: vec!["mean".to_string(), "seasonal_naive:auto".to_string()],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub path: PathBuf,
    /// Numeric data columns, timestamp excluded.
    pub columns: usize,
    #[serde(default = "default_true")]
    pub timestamp_column: bool,
    /// Univariate prediction target; defaults to the last column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate: Option<String>,
    /// Train:val:test row ratios (floor-border rule).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<[f64; 3]>,
    /// Explicit border override; wins over `split` when both are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub borders: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizons: Option<Vec<usize>>,
    /// Input length; defaults to the horizon of each task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lookback: Option<usize>,
    #[serde(default = "default_one")]
    pub offset: usize,
    #[serde(default = "default_one")]
    pub stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<String>>,
}

fn default_true() -> bool {
    true
}

fn default_one() -> usize {
    1
}

/// Protocol defaults for the standard benchmark datasets, keyed by name.
fn known_horizons(name: &str) -> Option<Vec<usize>> {
    match name {
        "ETTh1" | "ETTh2" => Some(vec![24, 48, 168, 336, 720]),
        "ETTm1" => Some(vec![24, 48, 96, 288, 672]),
        "Electricity" => Some(vec![48, 168, 336, 720, 960]),
        _ => None,
    }
}

fn known_split(name: &str) -> Option<[f64; 3]> {
    match name {
        "ETTh1" | "ETTh2" | "ETTm1" => Some([12.0, 4.0, 4.0]),
        "Electricity" => Some([15.0, 3.0, 4.0]),
        _ => None,
    }
}

fn known_sample_rate(name: &str) -> &'static str {
    match name {
        "ETTh1" | "ETTh2" | "Electricity" => "1h",
        "ETTm1" => "15min",
        _ => "unspecified",
    }
}

fn known_target(name: &str) -> Option<&'static str> {
    match name {
        "ETTh1" | "ETTh2" | "ETTm1" => Some("OT"),
        _ => None,
    }
}

impl DatasetConfig {
    pub fn split_spec(&self) -> Result<SplitSpec, CliError> {
        if let Some([border1, border2]) = self.borders {
            return Ok(SplitSpec::Borders { border1, border2 });
        }
        let [train, val, test] = self.split.ok_or_else(|| {
            CliError::Config(format!(
                "dataset {}: no split ratios or borders configured",
                self.name
            ))
        })?;
        SplitSpec::ratios(train, val, test)
            .map_err(|e| CliError::Config(format!("dataset {}: {e}", self.name)))
    }

    pub fn variate_modes(&self) -> Result<Vec<VariateMode>, CliError> {
        let names = self
            .modes
            .clone()
            .unwrap_or_else(|| vec!["uni".to_string(), "multi".to_string()]);
        names
            .iter()
            .map(|m| {
                VariateMode::from_str(m)
                    .map_err(|e| CliError::Config(format!("dataset {}: {e}", self.name)))
            })
            .collect()
    }

    pub fn horizon_list(&self) -> Vec<usize> {
        self.horizons.clone().unwrap_or_default()
    }

    pub fn lookback_for(&self, horizon: usize) -> usize {
        self.lookback.unwrap_or(horizon)
    }
}

impl HarnessConfig {
    /// Parses, fills name-based defaults, resolves dataset paths and
    /// validates. Relative dataset paths resolve against the data-root
    /// environment variable when set, else against the config file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let config_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let data_root = std::env::var_os(DATA_ROOT_ENV).map(PathBuf::from);
        Self::from_toml(&text, &config_dir, data_root.as_deref())
    }

    pub fn from_toml(
        text: &str,
        config_dir: &Path,
        data_root: Option<&Path>,
    ) -> Result<Self, CliError> {
        let mut config: HarnessConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("bad config: {e}")))?;
        config.resolve_defaults(config_dir, data_root)?;
        config.validate()?;
        Ok(config)
    }

    fn resolve_defaults(
        &mut self,
        config_dir: &Path,
        data_root: Option<&Path>,
    ) -> Result<(), CliError> {
        for dataset in &mut self.datasets {
            if dataset.horizons.is_none() {
                dataset.horizons = known_horizons(&dataset.name);
            }
            if dataset.split.is_none() && dataset.borders.is_none() {
                dataset.split = known_split(&dataset.name);
            }
            if dataset.sample_rate.is_none() {
                dataset.sample_rate = Some(known_sample_rate(&dataset.name).to_string());
            }
            if dataset.target.is_none() {
                dataset.target = known_target(&dataset.name).map(str::to_string);
            }
            if dataset.path.is_relative() {
                let root = data_root.unwrap_or(config_dir);
                dataset.path = root.join(&dataset.path);
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.output
            .format
            .parse::<TableFormat>()
            .map_err(CliError::Config)?;

        let mut names = std::collections::HashSet::new();
        for dataset in &self.datasets {
            if dataset.name.is_empty() {
                return bad("dataset with empty name".into());
            }
            if !names.insert(&dataset.name) {
                return bad(format!("duplicate dataset name {:?}", dataset.name));
            }
            if dataset.columns == 0 {
                return bad(format!("dataset {}: columns must be >= 1", dataset.name));
            }
            if dataset.offset == 0 || dataset.stride == 0 {
                return bad(format!(
                    "dataset {}: offset and stride must be >= 1",
                    dataset.name
                ));
            }
            let horizons = dataset.horizon_list();
            if horizons.is_empty() {
                return bad(format!(
                    "dataset {}: no horizons configured and none known for this name",
                    dataset.name
                ));
            }
            if horizons.contains(&0) {
                return bad(format!("dataset {}: horizons must be >= 1", dataset.name));
            }
            if dataset.lookback == Some(0) {
                return bad(format!("dataset {}: lookback must be >= 1", dataset.name));
            }
            dataset.split_spec()?;
            dataset.variate_modes()?;

            for spec in &self.eval.predictors {
                let predictor = Predictor::parse(spec)
                    .map_err(|e| CliError::Config(format!("bad predictor {spec:?}: {e}")))?;
                for &horizon in &horizons {
                    let lookback = dataset.lookback_for(horizon);
                    check_feasible(&predictor, lookback, horizon).map_err(|msg| {
                        CliError::Config(format!(
                            "dataset {} horizon {horizon}: predictor {spec:?} {msg}",
                            dataset.name
                        ))
                    })?;
                }
            }
        }

        let s = &self.selector;
        if s.acf_min_lag == 0 || s.acf_min_lag > s.acf_max_lag {
            return bad(format!(
                "selector: invalid acf lag range [{}, {}]",
                s.acf_min_lag, s.acf_max_lag
            ));
        }
        if !s.acf_threshold.is_finite() || !(-1.0..=1.0).contains(&s.acf_threshold) {
            return bad(format!(
                "selector: acf threshold {} outside [-1, 1]",
                s.acf_threshold
            ));
        }
        for &alpha in &s.alpha_grid {
            if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
                return bad(format!("selector: alpha {alpha} outside [0, 1]"));
            }
        }
        for candidate in &s.candidates {
            if candidate == "seasonal_naive:auto" {
                continue;
            }
            Predictor::parse(candidate).map_err(|e| {
                CliError::Config(format!("bad selector candidate {candidate:?}: {e}"))
            })?;
        }
        Ok(())
    }

    /// The fully resolved configuration as TOML, for the reproducibility
    /// echo written next to run outputs.
    pub fn effective_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self)
            .map_err(|e| CliError::Runtime(format!("cannot serialize effective config: {e}")))
    }

    pub fn dataset(&self, name: &str) -> Result<&DatasetConfig, CliError> {
        self.datasets
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| CliError::Config(format!("unknown dataset {name:?}")))
    }

    pub fn table_format(&self) -> TableFormat {
        self.output
            .format
            .parse()
            .expect("format was validated at load time")
    }
}

/// Static feasibility of a predictor for a (lookback, horizon) pair.
fn check_feasible(predictor: &Predictor, lookback: usize, horizon: usize) -> Result<(), String> {
    match predictor {
        Predictor::Hi => {
            if horizon > lookback {
                return Err(format!("needs lookback >= horizon, lookback is {lookback}"));
            }
        }
        Predictor::SeasonalNaive { period } => {
            if *period > lookback {
                return Err(format!(
                    "needs period {period} <= lookback, lookback is {lookback}"
                ));
            }
        }
        Predictor::Mean => {}
        Predictor::Hybrid { base, .. } => {
            check_feasible(&Predictor::Hi, lookback, horizon)?;
            check_feasible(base, lookback, horizon)?;
        }
    }
    Ok(())
}
