//! Naive predictors and the weighted hybrid combiner.
//!
//! The historical-inertia predictor copies the last `horizon` rows of its
//! input verbatim, so its output is bit-identical to the observed values.
//! The seasonal-naive and input-mean predictors are harness plumbing, not
//! benchmark subjects: they give the hybrid combiner and the selector a
//! non-inertia base to work against.

use ndarray::{s, Array2, Axis};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("historical inertia requires horizon <= lookback, got horizon {horizon} with lookback {lookback}")]
    HorizonExceedsLookback { horizon: usize, lookback: usize },
    #[error(
        "seasonal naive requires period <= lookback, got period {period} with lookback {lookback}"
    )]
    PeriodExceedsLookback { period: usize, lookback: usize },
    #[error("period must be >= 1")]
    ZeroPeriod,
    #[error("horizon must be >= 1")]
    ZeroHorizon,
    #[error("input window has no rows")]
    EmptyInput,
    #[error("no target columns selected")]
    NoTargetColumns,
    #[error("target column index {index} out of range for {columns} columns")]
    BadTargetColumn { index: usize, columns: usize },
    #[error("forecast shapes differ: {a:?} vs {b:?}")]
    ShapeMismatch {
        a: (usize, usize),
        b: (usize, usize),
    },
    #[error("hybrid weight must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("cannot parse predictor spec {0:?}")]
    ParseError(String),
}

/// An L_y×d_y prediction matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub values: Array2<f64>,
}

/// Mixing weight of a hybrid forecast, constrained to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridWeight(f64);

impl HybridWeight {
    pub fn new(alpha: f64) -> Result<Self, BaselineError> {
        if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
            return Err(BaselineError::InvalidAlpha(alpha));
        }
        Ok(HybridWeight(alpha))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

fn check_targets(input: &Array2<f64>, target_columns: &[usize]) -> Result<(), BaselineError> {
    if input.nrows() == 0 {
        return Err(BaselineError::EmptyInput);
    }
    if target_columns.is_empty() {
        return Err(BaselineError::NoTargetColumns);
    }
    for &index in target_columns {
        if index >= input.ncols() {
            return Err(BaselineError::BadTargetColumn {
                index,
                columns: input.ncols(),
            });
        }
    }
    Ok(())
}

/// Historical inertia: the last `horizon` input rows, restricted to the
/// target columns, copied without any arithmetic.
pub fn hi_forecast(
    input: &Array2<f64>,
    target_columns: &[usize],
    horizon: usize,
) -> Result<Forecast, BaselineError> {
    check_targets(input, target_columns)?;
    if horizon == 0 {
        return Err(BaselineError::ZeroHorizon);
    }
    let lookback = input.nrows();
    if horizon > lookback {
        return Err(BaselineError::HorizonExceedsLookback { horizon, lookback });
    }
    let tail = input.slice(s![lookback - horizon.., ..]);
    Ok(Forecast {
        values: tail.select(Axis(1), target_columns),
    })
}

/// Repeats the last observed full cycle: forecast row `i` is input row
/// `lookback − period + (i mod period)`.
pub fn seasonal_naive_forecast(
    input: &Array2<f64>,
    period: usize,
    target_columns: &[usize],
    horizon: usize,
) -> Result<Forecast, BaselineError> {
    check_targets(input, target_columns)?;
    if period == 0 {
        return Err(BaselineError::ZeroPeriod);
    }
    if horizon == 0 {
        return Err(BaselineError::ZeroHorizon);
    }
    let lookback = input.nrows();
    if period > lookback {
        return Err(BaselineError::PeriodExceedsLookback { period, lookback });
    }
    let cycle = input.select(Axis(1), target_columns);
    let mut values = Array2::zeros((horizon, target_columns.len()));
    for i in 0..horizon {
        let src = lookback - period + (i % period);
        values.row_mut(i).assign(&cycle.row(src));
    }
    Ok(Forecast { values })
}

/// Every forecast row is the per-column mean of the input.
pub fn mean_forecast(
    input: &Array2<f64>,
    target_columns: &[usize],
    horizon: usize,
) -> Result<Forecast, BaselineError> {
    check_targets(input, target_columns)?;
    if horizon == 0 {
        return Err(BaselineError::ZeroHorizon);
    }
    let selected = input.select(Axis(1), target_columns);
    let means = selected
        .mean_axis(Axis(0))
        .expect("input has at least one row");
    let mut values = Array2::zeros((horizon, target_columns.len()));
    for mut row in values.rows_mut() {
        row.assign(&means);
    }
    Ok(Forecast { values })
}

/// Cell-wise `alpha·a + (1−alpha)·b`. The endpoints return an exact copy of
/// the corresponding forecast so that alpha = 1 is bit-identical to `a` and
/// alpha = 0 to `b`.
pub fn hybrid_forecast(
    a: &Forecast,
    b: &Forecast,
    weight: HybridWeight,
) -> Result<Forecast, BaselineError> {
    if a.values.dim() != b.values.dim() {
        return Err(BaselineError::ShapeMismatch {
            a: a.values.dim(),
            b: b.values.dim(),
        });
    }
    let alpha = weight.value();
    if alpha == 1.0 {
        return Ok(a.clone());
    }
    if alpha == 0.0 {
        return Ok(b.clone());
    }
    Ok(Forecast {
        values: &a.values * alpha + &b.values * (1.0 - alpha),
    })
}

/// A predictor selectable by string name: `hi`, `mean`,
/// `seasonal_naive:<period>` or `hybrid:<alpha>:<base>` (the hybrid mixes
/// historical inertia with the base as `alpha·hi + (1−alpha)·base`).
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Hi,
    SeasonalNaive {
        period: usize,
    },
    Mean,
    Hybrid {
        alpha: HybridWeight,
        base: Box<Predictor>,
    },
}

impl Predictor {
    pub fn parse(spec: &str) -> Result<Self, BaselineError> {
        let spec = spec.trim();
        match spec {
            "hi" => return Ok(Predictor::Hi),
            "mean" => return Ok(Predictor::Mean),
            _ => {}
        }
        if let Some(rest) = spec.strip_prefix("seasonal_naive:") {
            let period: usize = rest
                .trim()
                .parse()
                .map_err(|_| BaselineError::ParseError(spec.to_string()))?;
            if period == 0 {
                return Err(BaselineError::ZeroPeriod);
            }
            return Ok(Predictor::SeasonalNaive { period });
        }
        if let Some(rest) = spec.strip_prefix("hybrid:") {
            let (alpha_str, base_str) = rest
                .split_once(':')
                .ok_or_else(|| BaselineError::ParseError(spec.to_string()))?;
            let alpha: f64 = alpha_str
                .trim()
                .parse()
                .map_err(|_| BaselineError::ParseError(spec.to_string()))?;
            return Ok(Predictor::Hybrid {
                alpha: HybridWeight::new(alpha)?,
                base: Box::new(Predictor::parse(base_str)?),
            });
        }
        Err(BaselineError::ParseError(spec.to_string()))
    }

    /// Canonical registry name, the inverse of [`Predictor::parse`].
    pub fn name(&self) -> String {
        match self {
            Predictor::Hi => "hi".to_string(),
            Predictor::Mean => "mean".to_string(),
            Predictor::SeasonalNaive { period } => format!("seasonal_naive:{period}"),
            Predictor::Hybrid { alpha, base } => {
                format!("hybrid:{}:{}", alpha.value(), base.name())
            }
        }
    }

    /// Runs the predictor on one input window.
    pub fn forecast(
        &self,
        input: &Array2<f64>,
        target_columns: &[usize],
        horizon: usize,
    ) -> Result<Forecast, BaselineError> {
        match self {
            Predictor::Hi => hi_forecast(input, target_columns, horizon),
            Predictor::Mean => mean_forecast(input, target_columns, horizon),
            Predictor::SeasonalNaive { period } => {
                seasonal_naive_forecast(input, *period, target_columns, horizon)
            }
            Predictor::Hybrid { alpha, base } => {
                let a = hi_forecast(input, target_columns, horizon)?;
                let b = base.forecast(input, target_columns, horizon)?;
                hybrid_forecast(&a, &b, *alpha)
            }
        }
    }
}
