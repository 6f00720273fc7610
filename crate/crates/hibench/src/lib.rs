//! Benchmark harness and baseline library for long-horizon time-series
//! forecasting.
//!
//! The crate covers the full evaluation loop used by long-sequence
//! forecasting benchmarks: delimited ingestion with schema validation,
//! chronological train/val/test splitting, train-fitted standardization,
//! rolling-window enumeration, naive predictors (historical inertia,
//! seasonal naive, input mean, weighted hybrids), windowed MSE/MAE,
//! autocorrelation-based period detection, validation-driven predictor
//! selection, and comparison tables against bundled published scores.
//!
//! Modules map one-to-one onto pipeline stages:
//!
//! - [`data`] — ingestion, target selection, splits, scaling
//! - [`windowing`] — forecast tasks and (input, target) window enumeration
//! - [`baselines`] — the predictors and the hybrid combiner
//! - [`metrics`] — MSE/MAE, relative improvement, bundled reference scores
//! - [`analysis`] — period detection and validation-driven selection
//! - [`report`] — comparison-table assembly and rendering

pub mod analysis;
pub mod baselines;
pub mod data;
pub mod metrics;
pub mod report;
pub mod windowing;

pub use analysis::{select_predictor, PeriodEstimate, SelectionResult, SelectorConfig};
pub use baselines::{Forecast, HybridWeight, Predictor};
pub use data::{ScalerParams, SplitSpec, TableSchema, TargetMode, TimeSeries};
pub use metrics::{MetricKind, MetricReport, ReferenceScores, VariateMode};
pub use report::{ComparisonTable, TableFormat};
pub use windowing::{ForecastTask, Window};
