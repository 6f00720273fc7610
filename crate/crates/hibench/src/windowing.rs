//! Forecast tasks and rolling (input, target) window enumeration.
//!
//! A window pairs a lookback range `[input_start, input_start + L_x)` with
//! a target range starting `offset − 1` steps after the input ends, so an
//! offset of 1 means the target begins immediately after the input.
//! Enumeration never crosses segment boundaries: windows are placed inside
//! one segment, which is what keeps test targets out of validation rows.

use ndarray::{s, Array2};
use thiserror::Error;

use crate::data::{TargetMode, TimeSeries};

#[derive(Debug, Error)]
pub enum WindowError {
    #[error("invalid task: {0}")]
    InvalidTask(&'static str),
    #[error("segment of {length} rows is too short: task needs at least {required} rows (lookback + offset - 1 + horizon)")]
    SegmentTooShort { length: usize, required: usize },
    #[error("window needs rows up to {needed}, series has {rows}")]
    OutOfRange { needed: usize, rows: usize },
    #[error("unknown target column {0:?}")]
    UnknownColumn(String),
}

/// One forecasting experiment: how much history a predictor sees, how far
/// it must predict, and how test windows advance.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastTask {
    /// Input length L_x in time steps.
    pub lookback: usize,
    /// Prediction length L_y in time steps.
    pub horizon: usize,
    /// Gap parameter Δ ≥ 1; 1 places the target right after the input.
    pub offset: usize,
    /// Step between consecutive window starts.
    pub stride: usize,
    pub target_mode: TargetMode,
}

impl ForecastTask {
    /// A task with offset 1, stride 1 and multivariate targets.
    pub fn new(lookback: usize, horizon: usize) -> Result<Self, WindowError> {
        let task = ForecastTask {
            lookback,
            horizon,
            offset: 1,
            stride: 1,
            target_mode: TargetMode::Multivariate,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<(), WindowError> {
        if self.lookback == 0 {
            return Err(WindowError::InvalidTask("lookback must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(WindowError::InvalidTask("horizon must be >= 1"));
        }
        if self.offset == 0 {
            return Err(WindowError::InvalidTask("offset must be >= 1"));
        }
        if self.stride == 0 {
            return Err(WindowError::InvalidTask("stride must be >= 1"));
        }
        Ok(())
    }

    /// Minimum segment length that admits one window.
    pub fn required_length(&self) -> usize {
        self.lookback + (self.offset - 1) + self.horizon
    }
}

/// One aligned (input, target) placement inside a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub input_start: usize,
    pub target_start: usize,
}

impl Window {
    pub fn input_range(&self, task: &ForecastTask) -> std::ops::Range<usize> {
        self.input_start..self.input_start + task.lookback
    }

    pub fn target_range(&self, task: &ForecastTask) -> std::ops::Range<usize> {
        self.target_start..self.target_start + task.horizon
    }
}

/// All windows whose target range fits in a segment of `segment_length`
/// rows, with `input_start ∈ {0, stride, 2·stride, …}`, in ascending order.
///
/// The count equals `floor((segment_length − L_x − (Δ−1) − L_y)/stride) + 1`.
pub fn enumerate_windows(
    segment_length: usize,
    task: &ForecastTask,
) -> Result<Vec<Window>, WindowError> {
    task.validate()?;
    let required = task.required_length();
    if segment_length < required {
        return Err(WindowError::SegmentTooShort {
            length: segment_length,
            required,
        });
    }
    let count = (segment_length - required) / task.stride + 1;
    let windows = (0..count)
        .map(|k| {
            let input_start = k * task.stride;
            Window {
                input_start,
                target_start: input_start + task.lookback + (task.offset - 1),
            }
        })
        .collect();
    Ok(windows)
}

/// Copies one window out of a series: the full-width input rows and the
/// target rows restricted to the task's target columns.
pub fn slice(
    ts: &TimeSeries,
    window: &Window,
    task: &ForecastTask,
) -> Result<(Array2<f64>, Array2<f64>), WindowError> {
    task.validate()?;
    let input_range = window.input_range(task);
    let target_range = window.target_range(task);
    let needed = input_range.end.max(target_range.end);
    if needed > ts.num_rows() {
        return Err(WindowError::OutOfRange {
            needed,
            rows: ts.num_rows(),
        });
    }
    let values = ts.values();
    let input = values.slice(s![input_range, ..]).to_owned();
    let target = match &task.target_mode {
        TargetMode::Multivariate => values.slice(s![target_range, ..]).to_owned(),
        TargetMode::Univariate(name) => {
            let idx = ts
                .column_index(name)
                .ok_or_else(|| WindowError::UnknownColumn(name.clone()))?;
            values.slice(s![target_range, idx..idx + 1]).to_owned()
        }
    };
    Ok((input, target))
}
