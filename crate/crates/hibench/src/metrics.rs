//! Windowed MSE/MAE, relative improvement and bundled published scores.
//!
//! Both metrics average the per-window mean elementwise error over the
//! windows, which equals the flat mean over all elements when every window
//! has the same shape. Per-window means are accumulated in canonical window
//! order and reduced with a fixed-chunk pairwise tree, so serial and
//! parallel evaluation produce the same bytes.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::Forecast;

/// Transcription of the bundled published-score tables.
pub const REFERENCE_SCORES_VERSION: &str = "1";

const REFERENCE_SCORES_CSV: &str = include_str!("../data/reference_scores_v1.csv");

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("no windows to aggregate")]
    EmptyInput,
    #[error("{predictions} predictions but {truths} truths")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error(
        "window {index}: prediction shape {prediction:?} does not match truth shape {truth:?}"
    )]
    ShapeMismatch {
        index: usize,
        prediction: (usize, usize),
        truth: (usize, usize),
    },
    #[error("reference score must be positive, got {0}")]
    NonPositiveReference(f64),
    #[error("no reference scores for {0}")]
    UnknownReferenceKey(RefKey),
    #[error("reference score file line {line}: {message}")]
    BadReferenceFile { line: usize, message: String },
}

/// Which error statistic a value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Mse,
    Mae,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Mse => write!(f, "mse"),
            MetricKind::Mae => write!(f, "mae"),
        }
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mse" => Ok(MetricKind::Mse),
            "mae" => Ok(MetricKind::Mae),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

/// Univariate vs multivariate task flavour, the key used by published
/// score tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariateMode {
    Univariate,
    Multivariate,
}

impl fmt::Display for VariateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariateMode::Univariate => write!(f, "univariate"),
            VariateMode::Multivariate => write!(f, "multivariate"),
        }
    }
}

impl FromStr for VariateMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uni" | "univariate" => Ok(VariateMode::Univariate),
            "multi" | "multivariate" => Ok(VariateMode::Multivariate),
            other => Err(format!("unknown variate mode {other:?}")),
        }
    }
}

/// Deterministic sum: fixed-chunk pairwise tree, independent of thread
/// count and better conditioned than a running sum.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    const CHUNK: usize = 64;
    if values.len() <= CHUNK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Streaming per-window error aggregator. Windows are pushed in canonical
/// order; per-window means are stored and reduced at the end, so results do
/// not depend on how the pushes were produced.
#[derive(Debug, Default, Clone)]
pub struct ErrorAccumulator {
    squared: Vec<f64>,
    absolute: Vec<f64>,
}

impl ErrorAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one window's per-element errors.
    pub fn push(
        &mut self,
        prediction: &Forecast,
        truth: &ArrayView2<f64>,
    ) -> Result<(), MetricError> {
        let p = prediction.values.view();
        if p.dim() != truth.dim() {
            return Err(MetricError::ShapeMismatch {
                index: self.squared.len(),
                prediction: p.dim(),
                truth: truth.dim(),
            });
        }
        let cells = (p.nrows() * p.ncols()) as f64;
        let mut sq = 0.0;
        let mut abs = 0.0;
        for (a, b) in p.iter().zip(truth.iter()) {
            let e = a - b;
            sq += e * e;
            abs += e.abs();
        }
        self.squared.push(sq / cells);
        self.absolute.push(abs / cells);
        Ok(())
    }

    /// Appends another accumulator's windows after this one's. Chunked
    /// parallel producers merge in chunk order to restore the canonical
    /// window order.
    pub fn merge(&mut self, other: ErrorAccumulator) {
        self.squared.extend(other.squared);
        self.absolute.extend(other.absolute);
    }

    pub fn window_count(&self) -> usize {
        self.squared.len()
    }

    pub fn mse(&self) -> Result<f64, MetricError> {
        if self.squared.is_empty() {
            return Err(MetricError::EmptyInput);
        }
        Ok(pairwise_sum(&self.squared) / self.squared.len() as f64)
    }

    pub fn mae(&self) -> Result<f64, MetricError> {
        if self.absolute.is_empty() {
            return Err(MetricError::EmptyInput);
        }
        Ok(pairwise_sum(&self.absolute) / self.absolute.len() as f64)
    }
}

fn accumulate(
    predictions: &[Forecast],
    truths: &[ndarray::Array2<f64>],
) -> Result<ErrorAccumulator, MetricError> {
    if predictions.len() != truths.len() {
        return Err(MetricError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut acc = ErrorAccumulator::new();
    for (p, t) in predictions.iter().zip(truths.iter()) {
        acc.push(p, &t.view())?;
    }
    Ok(acc)
}

/// Mean over windows of the per-window mean squared elementwise error.
pub fn mse(predictions: &[Forecast], truths: &[ndarray::Array2<f64>]) -> Result<f64, MetricError> {
    accumulate(predictions, truths)?.mse()
}

/// Mean over windows of the per-window mean absolute elementwise error.
pub fn mae(predictions: &[Forecast], truths: &[ndarray::Array2<f64>]) -> Result<f64, MetricError> {
    accumulate(predictions, truths)?.mae()
}

/// Signed relative improvement `(best_sota − hi) / best_sota`: positive
/// when the inertia baseline beats the best published score.
pub fn relative_improvement(best_sota: f64, hi: f64) -> Result<f64, MetricError> {
    if !best_sota.is_finite() || best_sota <= 0.0 {
        return Err(MetricError::NonPositiveReference(best_sota));
    }
    Ok((best_sota - hi) / best_sota)
}

/// Aggregated scores of one predictor on one task cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub dataset: String,
    pub predictor: String,
    pub mode: VariateMode,
    pub horizon: usize,
    pub lookback: usize,
    pub offset: usize,
    pub stride: usize,
    pub window_count: usize,
    pub mse: f64,
    pub mae: f64,
}

/// Lookup key into the published-score tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RefKey {
    pub dataset: String,
    pub mode: VariateMode,
    pub horizon: usize,
    pub metric: MetricKind,
}

impl fmt::Display for RefKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{}-{}-{}",
            self.dataset, self.mode, self.horizon, self.metric
        )
    }
}

/// Published competitor scores, one entry list per (dataset, mode, horizon,
/// metric) in original table row order. Bundled read-only with the crate.
#[derive(Debug, Clone)]
pub struct ReferenceScores {
    entries: HashMap<RefKey, Vec<(String, f64)>>,
    model_order: HashMap<VariateMode, Vec<String>>,
    version: String,
}

impl ReferenceScores {
    /// The score table bundled with the crate.
    pub fn bundled() -> &'static ReferenceScores {
        static BUNDLED: OnceLock<ReferenceScores> = OnceLock::new();
        BUNDLED.get_or_init(|| {
            ReferenceScores::from_csv(REFERENCE_SCORES_CSV, REFERENCE_SCORES_VERSION)
                .expect("bundled reference score file is well-formed")
        })
    }

    /// Parses `dataset,mode,horizon,metric,model,value` lines; `#` lines
    /// are comments.
    pub fn from_csv(text: &str, version: &str) -> Result<Self, MetricError> {
        let mut entries: HashMap<RefKey, Vec<(String, f64)>> = HashMap::new();
        let mut model_order: HashMap<VariateMode, Vec<String>> = HashMap::new();
        let mut saw_header = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                saw_header = true;
                continue;
            }
            let bad = |message: String| MetricError::BadReferenceFile {
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(bad(format!("expected 6 fields, found {}", fields.len())));
            }
            let mode: VariateMode = fields[1].parse().map_err(bad)?;
            let horizon: usize = fields[2]
                .parse()
                .map_err(|e| bad(format!("bad horizon: {e}")))?;
            let metric: MetricKind = fields[3].parse().map_err(bad)?;
            let model = fields[4].to_string();
            let value: f64 = fields[5]
                .parse()
                .map_err(|e| bad(format!("bad value: {e}")))?;
            if !value.is_finite() || value <= 0.0 {
                return Err(bad(format!("score must be positive, got {value}")));
            }
            let order = model_order.entry(mode).or_default();
            if !order.contains(&model) {
                order.push(model.clone());
            }
            entries
                .entry(RefKey {
                    dataset: fields[0].to_string(),
                    mode,
                    horizon,
                    metric,
                })
                .or_default()
                .push((model, value));
        }
        Ok(ReferenceScores {
            entries,
            model_order,
            version: version.to_string(),
        })
    }

    pub fn get(&self, key: &RefKey) -> Option<&[(String, f64)]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    /// Model names for one mode, in original table row order.
    pub fn models(&self, mode: VariateMode) -> &[String] {
        self.model_order
            .get(&mode)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The best (lowest) published score for a key and the model that holds
/// it; ties go to the model listed first in the table.
pub fn best_reference(refs: &ReferenceScores, key: &RefKey) -> Result<(String, f64), MetricError> {
    let entries = refs
        .get(key)
        .filter(|e| !e.is_empty())
        .ok_or_else(|| MetricError::UnknownReferenceKey(key.clone()))?;
    let mut best = &entries[0];
    for entry in &entries[1..] {
        if entry.1 < best.1 {
            best = entry;
        }
    }
    Ok(best.clone())
}
