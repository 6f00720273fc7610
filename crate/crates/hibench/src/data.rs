//! Dataset ingestion, chronological splitting and train-fitted scaling.
//!
//! Files are comma-separated with one header row and an optional leading
//! timestamp column that is dropped from the numeric values. Everything
//! downstream works on a validated [`TimeSeries`]: a T×d matrix of finite
//! reals with named columns. Splits are contiguous row ranges; the scaler
//! is fitted on the training segment only and applied everywhere else.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use ndarray::{s, Array2, Axis};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("empty series: file has a header but no data rows")]
    EmptySeries,
    #[error("data row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} data columns, file has {found}")]
    ColumnCountMismatch { expected: usize, found: usize },
    #[error("data row {row}, column {column:?}: cannot parse {value:?} as a number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("data row {row}, column {column:?}: non-finite value")]
    NonFinite { row: usize, column: String },
    #[error("invalid series shape: need at least one row and one column")]
    EmptyMatrix,
    #[error("column names must be distinct and non-empty; got {0:?}")]
    BadColumnNames(Vec<String>),
    #[error("expected {expected} column names for {expected} columns, got {found}")]
    ColumnNameCount { expected: usize, found: usize },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("split ratios must be nonnegative with a positive sum, got {0:?}")]
    InvalidRatios([f64; 3]),
    #[error(
        "split borders ({border1}, {border2}) leave an empty {segment} segment for {rows} rows"
    )]
    EmptySegment {
        border1: usize,
        border2: usize,
        rows: usize,
        segment: &'static str,
    },
    #[error("constant column {0:?}: cannot standardize zero-variance data")]
    ConstantColumn(String),
    #[error("scaler fitted for {expected} columns, series has {found}")]
    ScalerShapeMismatch { expected: usize, found: usize },
}

/// A T×d matrix of finite reals with named columns, in chronological row
/// order. The universe from which forecast windows are cut.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    values: Array2<f64>,
    column_names: Vec<String>,
    sample_rate: String,
    read_probe: Option<Arc<AtomicU64>>,
}

impl TimeSeries {
    /// Validates shape (T ≥ 1, d ≥ 1), finiteness of every cell and
    /// distinct non-empty column names.
    pub fn new(
        values: Array2<f64>,
        column_names: Vec<String>,
        sample_rate: impl Into<String>,
    ) -> Result<Self, DataError> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(DataError::EmptyMatrix);
        }
        if column_names.len() != values.ncols() {
            return Err(DataError::ColumnNameCount {
                expected: values.ncols(),
                found: column_names.len(),
            });
        }
        let distinct: std::collections::HashSet<&str> =
            column_names.iter().map(|s| s.as_str()).collect();
        if distinct.len() != column_names.len() || column_names.iter().any(|n| n.is_empty()) {
            return Err(DataError::BadColumnNames(column_names));
        }
        for ((row, col), v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(DataError::NonFinite {
                    row: row + 1,
                    column: column_names[col].clone(),
                });
            }
        }
        Ok(Self {
            values,
            column_names,
            sample_rate: sample_rate.into(),
            read_probe: None,
        })
    }

    /// The value matrix. Bumps the read probe when one is attached.
    pub fn values(&self) -> &Array2<f64> {
        if let Some(probe) = &self.read_probe {
            probe.fetch_add(1, Ordering::Relaxed);
        }
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn sample_rate(&self) -> &str {
        &self.sample_rate
    }

    pub fn num_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// One column as an owned vector. Bumps the read probe.
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.values().column(index).to_vec()
    }

    /// Attaches a counter that is incremented on every access to the value
    /// matrix. Test instrumentation for the "training data is only read to
    /// fit the scaler" guarantee.
    pub fn set_read_probe(&mut self, probe: Arc<AtomicU64>) {
        self.read_probe = Some(probe);
    }
}

/// Expected layout of a delimited dataset file.
#[derive(Debug, Clone)]
pub struct TableSchema {
    /// Number of numeric data columns (the timestamp column excluded).
    pub columns: usize,
    /// Whether the first column is a timestamp to drop from the values.
    pub timestamp_column: bool,
    /// Declared sampling interval label, informational only (e.g. "1h").
    pub sample_rate: String,
}

/// Loads a comma-separated file with one header row into a [`TimeSeries`].
///
/// Row order is preserved; every cell must parse as a finite real. The
/// optional leading timestamp column is dropped and never used as a
/// feature.
pub fn load_table(path: &Path, schema: &TableSchema) -> Result<TimeSeries, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(BufReader::new(file));

    let headers = reader
        .headers()
        .map_err(|source| DataError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let skip = usize::from(schema.timestamp_column);
    let total_fields = headers.len();
    if total_fields < skip + 1 {
        return Err(DataError::ColumnCountMismatch {
            expected: schema.columns,
            found: total_fields.saturating_sub(skip),
        });
    }
    let column_names: Vec<String> = headers.iter().skip(skip).map(str::to_owned).collect();
    if column_names.len() != schema.columns {
        return Err(DataError::ColumnCountMismatch {
            expected: schema.columns,
            found: column_names.len(),
        });
    }

    let mut cells: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| DataError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let row = i + 1;
        if record.len() != total_fields {
            return Err(DataError::RaggedRow {
                row,
                expected: total_fields,
                found: record.len(),
            });
        }
        for (j, field) in record.iter().skip(skip).enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| DataError::NonNumeric {
                row,
                column: column_names[j].clone(),
                value: field.to_string(),
            })?;
            if !value.is_finite() {
                return Err(DataError::NonFinite {
                    row,
                    column: column_names[j].clone(),
                });
            }
            cells.push(value);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(DataError::EmptySeries);
    }

    let values = Array2::from_shape_vec((rows, schema.columns), cells)
        .expect("row-major cell buffer matches the declared shape");
    TimeSeries::new(values, column_names, schema.sample_rate.clone())
}

/// Which columns a forecast targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetMode {
    /// Predict a single named column.
    Univariate(String),
    /// Predict every column.
    Multivariate,
}

impl TargetMode {
    /// Resolves the target columns of `ts` as indices.
    pub fn resolve_columns(&self, ts: &TimeSeries) -> Result<Vec<usize>, DataError> {
        match self {
            TargetMode::Univariate(name) => {
                let idx = ts
                    .column_index(name)
                    .ok_or_else(|| DataError::UnknownColumn(name.clone()))?;
                Ok(vec![idx])
            }
            TargetMode::Multivariate => Ok((0..ts.num_cols()).collect()),
        }
    }
}

/// Restricts a series to its prediction targets: a T×1 series of the named
/// column in univariate mode, the unchanged input in multivariate mode.
pub fn select_targets(ts: &TimeSeries, mode: &TargetMode) -> Result<TimeSeries, DataError> {
    match mode {
        TargetMode::Multivariate => Ok(ts.clone()),
        TargetMode::Univariate(name) => {
            let idx = ts
                .column_index(name)
                .ok_or_else(|| DataError::UnknownColumn(name.clone()))?;
            let column = ts.values().slice(s![.., idx..idx + 1]).to_owned();
            TimeSeries::new(column, vec![name.clone()], ts.sample_rate().to_owned())
        }
    }
}

/// How to cut a series into chronological train/val/test segments.
///
/// Ratio splits use the floor-border rule; explicit borders exist so that
/// externally defined (e.g. calendar-exact) splits can be supplied.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitSpec {
    Ratios { train: f64, val: f64, test: f64 },
    Borders { border1: usize, border2: usize },
}

impl SplitSpec {
    pub fn ratios(train: f64, val: f64, test: f64) -> Result<Self, DataError> {
        let parts = [train, val, test];
        let sum: f64 = parts.iter().sum();
        if parts.iter().any(|r| !r.is_finite() || *r < 0.0) || sum <= 0.0 {
            return Err(DataError::InvalidRatios(parts));
        }
        Ok(SplitSpec::Ratios { train, val, test })
    }

    /// The two border row indices for a series of `rows` rows:
    /// `b1 = floor(T·r_train/sum)`, `b2 = floor(T·(r_train+r_val)/sum)`.
    /// Every segment must be non-empty (0 < b1 < b2 < T).
    pub fn resolve(&self, rows: usize) -> Result<(usize, usize), DataError> {
        let (b1, b2) = match *self {
            SplitSpec::Ratios { train, val, test } => {
                let sum = train + val + test;
                if sum.is_nan() || sum <= 0.0 {
                    return Err(DataError::InvalidRatios([train, val, test]));
                }
                let b1 = (rows as f64 * train / sum).floor() as usize;
                let b2 = (rows as f64 * (train + val) / sum).floor() as usize;
                (b1, b2)
            }
            SplitSpec::Borders { border1, border2 } => (border1, border2),
        };
        let segment = if b1 == 0 {
            Some("train")
        } else if b2 <= b1 {
            Some("validation")
        } else if b2 >= rows {
            Some("test")
        } else {
            None
        };
        if let Some(segment) = segment {
            return Err(DataError::EmptySegment {
                border1: b1,
                border2: b2,
                rows,
                segment,
            });
        }
        Ok((b1, b2))
    }
}

/// Cuts `ts` into three contiguous segments covering rows `[0, b1)`,
/// `[b1, b2)` and `[b2, T)`; their concatenation reproduces `ts` exactly.
pub fn split(
    ts: &TimeSeries,
    spec: &SplitSpec,
) -> Result<(TimeSeries, TimeSeries, TimeSeries), DataError> {
    let (b1, b2) = spec.resolve(ts.num_rows())?;
    let segment = |range: std::ops::Range<usize>| {
        TimeSeries::new(
            ts.values().slice(s![range, ..]).to_owned(),
            ts.column_names().to_vec(),
            ts.sample_rate().to_owned(),
        )
    };
    Ok((
        segment(0..b1)?,
        segment(b1..b2)?,
        segment(b2..ts.num_rows())?,
    ))
}

/// Per-column standardization parameters fitted on a training segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerParams {
    pub means: Vec<f64>,
    /// Population (divide-by-n) standard deviations, all strictly positive.
    pub stds: Vec<f64>,
}

impl ScalerParams {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }
}

/// Fits per-column mean and population standard deviation on the training
/// segment only. Constant columns are rejected: silently epsilon-flooring
/// them would corrupt scaled-space metrics.
pub fn fit_scaler(train: &TimeSeries) -> Result<ScalerParams, DataError> {
    let values = train.values();
    let n = values.nrows() as f64;
    let mut means = Vec::with_capacity(values.ncols());
    let mut stds = Vec::with_capacity(values.ncols());
    for (j, column) in values.axis_iter(Axis(1)).enumerate() {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for &v in column.iter() {
            min = min.min(v);
            max = max.max(v);
            sum += v;
        }
        let mean = sum / n;
        let var = column.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if min == max || std == 0.0 {
            return Err(DataError::ConstantColumn(train.column_names()[j].clone()));
        }
        means.push(mean);
        stds.push(std);
    }
    Ok(ScalerParams { means, stds })
}

/// Standardizes every cell: `x' = (x − mean_j) / std_j`.
pub fn apply_scaler(ts: &TimeSeries, params: &ScalerParams) -> Result<TimeSeries, DataError> {
    transform(ts, params, |x, m, s| (x - m) / s)
}

/// Exact inverse of [`apply_scaler`]: `x = x'·std_j + mean_j`.
pub fn invert_scaler(ts: &TimeSeries, params: &ScalerParams) -> Result<TimeSeries, DataError> {
    transform(ts, params, |x, m, s| x * s + m)
}

fn transform(
    ts: &TimeSeries,
    params: &ScalerParams,
    f: impl Fn(f64, f64, f64) -> f64,
) -> Result<TimeSeries, DataError> {
    if params.len() != ts.num_cols() {
        return Err(DataError::ScalerShapeMismatch {
            expected: params.len(),
            found: ts.num_cols(),
        });
    }
    let mut values = ts.values().clone();
    for (j, mut column) in values.axis_iter_mut(Axis(1)).enumerate() {
        let (m, s) = (params.means[j], params.stds[j]);
        column.mapv_inplace(|x| f(x, m, s));
    }
    TimeSeries::new(
        values,
        ts.column_names().to_vec(),
        ts.sample_rate().to_owned(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::io::Write;

    fn schema(columns: usize, timestamp: bool) -> TableSchema {
        TableSchema {
            columns,
            timestamp_column: timestamp,
            sample_rate: "1h".to_string(),
        }
    }

    fn write_temp(contents: &str) -> std::path::PathBuf {
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let path = std::env::temp_dir().join(format!(
            "hibench_data_test_{}_{}.csv",
            std::process::id(),
            COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let mut f = File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    fn series(values: Array2<f64>) -> TimeSeries {
        let names = (0..values.ncols()).map(|i| format!("c{i}")).collect();
        TimeSeries::new(values, names, "1h").unwrap()
    }

    #[test]
    fn load_single_column() {
        let path = write_temp("v\n1\n2\n3\n");
        let ts = load_table(&path, &schema(1, false)).unwrap();
        assert_eq!(ts.num_rows(), 3);
        assert_eq!(ts.num_cols(), 1);
        assert_eq!(ts.values().column(0).to_vec(), vec![1.0, 2.0, 3.0]);
        assert_eq!(ts.column_names(), ["v"]);
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn load_drops_timestamp_column() {
        let path = write_temp("date,a,b\n2016-07-01 00:00:00,1,2\n2016-07-01 01:00:00,3,4\n");
        let ts = load_table(&path, &schema(2, true)).unwrap();
        assert_eq!(ts.column_names(), ["a", "b"]);
        assert_eq!(ts.values(), &array![[1.0, 2.0], [3.0, 4.0]]);
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn load_header_only_is_empty_series() {
        let path = write_temp("date,a\n");
        let err = load_table(&path, &schema(1, true)).unwrap_err();
        assert!(matches!(err, DataError::EmptySeries), "{err}");
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn load_rejects_missing_file() {
        let err = load_table(Path::new("/nonexistent/f.csv"), &schema(1, false)).unwrap_err();
        assert!(matches!(err, DataError::Io { .. }));
    }

    #[test]
    fn load_rejects_non_numeric_cell() {
        let path = write_temp("a,b\n1,2\n3,oops\n");
        let err = load_table(&path, &schema(2, false)).unwrap_err();
        match err {
            DataError::NonNumeric { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "b", "oops"));
            }
            other => panic!("unexpected error: {other}"),
        }
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn load_rejects_nan_and_inf_cells() {
        for bad in ["NaN", "inf", "-inf"] {
            let path = write_temp(&format!("a\n1\n{bad}\n"));
            let err = load_table(&path, &schema(1, false)).unwrap_err();
            assert!(
                matches!(err, DataError::NonFinite { row: 2, .. }),
                "{bad}: {err}"
            );
            std::fs::remove_file(path).unwrap();
        }
    }

    #[test]
    fn load_rejects_ragged_rows() {
        let path = write_temp("a,b\n1,2\n3\n");
        let err = load_table(&path, &schema(2, false)).unwrap_err();
        assert!(
            matches!(
                err,
                DataError::RaggedRow {
                    row: 2,
                    expected: 2,
                    found: 1
                }
            ),
            "{err}"
        );
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn load_rejects_column_count_mismatch() {
        let path = write_temp("a,b\n1,2\n");
        let err = load_table(&path, &schema(7, false)).unwrap_err();
        assert!(
            matches!(
                err,
                DataError::ColumnCountMismatch {
                    expected: 7,
                    found: 2
                }
            ),
            "{err}"
        );
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn load_is_deterministic() {
        let body = "a,b\n1,2\n3,4\n5,6\n";
        let p1 = write_temp(body);
        let p2 = write_temp(body);
        let t1 = load_table(&p1, &schema(2, false)).unwrap();
        let t2 = load_table(&p2, &schema(2, false)).unwrap();
        assert_eq!(t1.values(), t2.values());
        assert_eq!(t1.column_names(), t2.column_names());
        std::fs::remove_file(p1).unwrap();
        std::fs::remove_file(p2).unwrap();
    }

    #[test]
    fn select_targets_univariate_extracts_named_column() {
        let ts = TimeSeries::new(
            array![[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]],
            vec!["a".into(), "OT".into()],
            "1h",
        )
        .unwrap();
        let uni = select_targets(&ts, &TargetMode::Univariate("OT".into())).unwrap();
        assert_eq!(uni.num_cols(), 1);
        assert_eq!(uni.column_names(), ["OT"]);
        assert_eq!(uni.values().column(0).to_vec(), vec![10.0, 20.0, 30.0]);
    }

    #[test]
    fn select_targets_multivariate_is_identity() {
        let ts = series(array![[1.0, 2.0], [3.0, 4.0]]);
        let out = select_targets(&ts, &TargetMode::Multivariate).unwrap();
        assert_eq!(out.values(), ts.values());
        assert_eq!(out.column_names(), ts.column_names());
    }

    #[test]
    fn select_targets_unknown_column_errors() {
        let ts = series(array![[1.0], [2.0]]);
        let err = select_targets(&ts, &TargetMode::Univariate("nonexistent".into())).unwrap_err();
        assert!(matches!(err, DataError::UnknownColumn(_)));
    }

    #[test]
    fn split_exact_ratio_fit() {
        let values = Array2::from_shape_fn((20, 1), |(i, _)| i as f64);
        let ts = series(values);
        let spec = SplitSpec::ratios(12.0, 4.0, 4.0).unwrap();
        let (train, val, test) = split(&ts, &spec).unwrap();
        assert_eq!(
            (train.num_rows(), val.num_rows(), test.num_rows()),
            (12, 4, 4)
        );
        // concatenation reproduces the input
        let rebuilt: Vec<f64> = train
            .values()
            .column(0)
            .iter()
            .chain(val.values().column(0).iter())
            .chain(test.values().column(0).iter())
            .copied()
            .collect();
        assert_eq!(rebuilt, ts.values().column(0).to_vec());
    }

    #[test]
    fn split_borders_match_floor_rule_for_electricity_shape() {
        // floor(26304·15/22) and floor(26304·18/22), cross-checked with
        // integer arithmetic.
        assert_eq!((26304usize * 15) / 22, 17934);
        assert_eq!((26304usize * 18) / 22, 21521);
        let spec = SplitSpec::ratios(15.0, 3.0, 4.0).unwrap();
        assert_eq!(spec.resolve(26304).unwrap(), (17934, 21521));
    }

    #[test]
    fn split_tiny_series_follows_border_formula() {
        let spec = SplitSpec::ratios(12.0, 4.0, 4.0).unwrap();
        assert_eq!(spec.resolve(5).unwrap(), (3, 4));
        let ts = series(Array2::from_shape_fn((5, 1), |(i, _)| i as f64));
        let (train, val, test) = split(&ts, &spec).unwrap();
        assert_eq!(
            (train.num_rows(), val.num_rows(), test.num_rows()),
            (3, 1, 1)
        );
    }

    #[test]
    fn split_rejects_empty_segments() {
        let spec = SplitSpec::ratios(1.0, 0.0, 1.0).unwrap();
        let err = spec.resolve(4).unwrap_err();
        assert!(
            matches!(
                err,
                DataError::EmptySegment {
                    segment: "validation",
                    ..
                }
            ),
            "{err}"
        );
        let explicit = SplitSpec::Borders {
            border1: 0,
            border2: 2,
        };
        assert!(matches!(
            explicit.resolve(4).unwrap_err(),
            DataError::EmptySegment {
                segment: "train",
                ..
            }
        ));
    }

    #[test]
    fn split_lengths_within_one_row_of_exact_ratios() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let rows = rng.random_range(3..5000usize);
            let r: [f64; 3] = [
                rng.random_range(1..20) as f64,
                rng.random_range(1..20) as f64,
                rng.random_range(1..20) as f64,
            ];
            let spec = SplitSpec::ratios(r[0], r[1], r[2]).unwrap();
            let Ok((b1, b2)) = spec.resolve(rows) else {
                continue; // degenerate combination for this length
            };
            let sum = r[0] + r[1] + r[2];
            let exact = [
                rows as f64 * r[0] / sum,
                rows as f64 * r[1] / sum,
                rows as f64 * r[2] / sum,
            ];
            let lens = [b1 as f64, (b2 - b1) as f64, (rows - b2) as f64];
            for (len, ex) in lens.iter().zip(exact.iter()) {
                assert!((len - ex).abs() < 1.0, "len {len} vs exact {ex}");
            }
        }
    }

    #[test]
    fn ratios_validate() {
        assert!(SplitSpec::ratios(-1.0, 2.0, 1.0).is_err());
        assert!(SplitSpec::ratios(0.0, 0.0, 0.0).is_err());
        assert!(SplitSpec::ratios(12.0, 4.0, 4.0).is_ok());
    }

    #[test]
    fn fit_scaler_population_std() {
        let ts = series(array![[1.0], [3.0]]);
        let p = fit_scaler(&ts).unwrap();
        assert_eq!(p.means, vec![2.0]);
        assert_eq!(p.stds, vec![1.0]);
    }

    #[test]
    fn fit_scaler_rejects_constant_column() {
        let ts = TimeSeries::new(
            array![[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]],
            vec!["flat".into(), "x".into()],
            "1h",
        )
        .unwrap();
        match fit_scaler(&ts).unwrap_err() {
            DataError::ConstantColumn(name) => assert_eq!(name, "flat"),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn fit_scaler_matches_brute_force_oracle() {
        let ts = series(array![[0.0, 10.0], [2.0, 10.0], [4.0, 16.0]]);
        let p = fit_scaler(&ts).unwrap();

        // brute-force per-column mean/population-std oracle
        let cols = [vec![0.0, 2.0, 4.0], vec![10.0, 10.0, 16.0]];
        for (j, col) in cols.iter().enumerate() {
            let mean: f64 = col.iter().sum::<f64>() / col.len() as f64;
            let var: f64 = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64;
            assert!((p.means[j] - mean).abs() < 1e-12);
            assert!((p.stds[j] - var.sqrt()).abs() < 1e-12);
        }
        assert!((p.means[0] - 2.0).abs() < 1e-12);
        assert!((p.means[1] - 12.0).abs() < 1e-12);
        assert!((p.stds[0] - 1.632993161855452).abs() < 1e-12);
        assert!((p.stds[1] - 2.8284271247461903).abs() < 1e-12);
    }

    #[test]
    fn apply_scaler_centers_and_scales() {
        let p = ScalerParams {
            means: vec![2.0],
            stds: vec![1.0],
        };
        let ts = series(array![[2.0]]);
        assert_eq!(apply_scaler(&ts, &p).unwrap().values(), &array![[0.0]]);
        let p2 = ScalerParams {
            means: vec![2.0],
            stds: vec![2.0],
        };
        let ts2 = series(array![[4.0]]);
        assert_eq!(apply_scaler(&ts2, &p2).unwrap().values(), &array![[1.0]]);
    }

    #[test]
    fn scaler_roundtrip_is_identity() {
        let mut rng = StdRng::seed_from_u64(42);
        let values = Array2::from_shape_fn((10, 3), |_| rng.random_range(-50.0..50.0));
        let ts = series(values);
        let p = fit_scaler(&ts).unwrap();
        let back = invert_scaler(&apply_scaler(&ts, &p).unwrap(), &p).unwrap();
        for (a, b) in ts.values().iter().zip(back.values().iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn scaled_train_has_zero_mean_unit_std() {
        let mut rng = StdRng::seed_from_u64(3);
        let values = Array2::from_shape_fn((500, 4), |_| rng.random_range(-5.0..20.0));
        let train = series(values);
        let p = fit_scaler(&train).unwrap();
        let scaled = apply_scaler(&train, &p).unwrap();
        for column in scaled.values().axis_iter(Axis(1)) {
            let n = column.len() as f64;
            let mean = column.sum() / n;
            let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9, "mean {mean}");
            assert!((var.sqrt() - 1.0).abs() < 1e-9, "std {}", var.sqrt());
        }
    }

    #[test]
    fn apply_scaler_rejects_dimension_mismatch() {
        let p = ScalerParams {
            means: vec![0.0, 0.0],
            stds: vec![1.0, 1.0],
        };
        let ts = series(array![[1.0]]);
        assert!(matches!(
            apply_scaler(&ts, &p).unwrap_err(),
            DataError::ScalerShapeMismatch {
                expected: 2,
                found: 1
            }
        ));
    }

    #[test]
    fn read_probe_counts_value_accesses() {
        let mut ts = series(array![[1.0], [2.0]]);
        let probe = Arc::new(AtomicU64::new(0));
        ts.set_read_probe(probe.clone());
        let _ = ts.num_rows(); // shape queries are not data reads
        assert_eq!(probe.load(Ordering::Relaxed), 0);
        let _ = ts.values();
        let _ = fit_scaler(&ts).unwrap();
        assert_eq!(probe.load(Ordering::Relaxed), 2);
    }

    #[test]
    fn timeseries_validates_invariants() {
        assert!(TimeSeries::new(Array2::zeros((0, 1)), vec!["a".into()], "1h").is_err());
        assert!(matches!(
            TimeSeries::new(array![[1.0, f64::NAN]], vec!["a".into(), "b".into()], "1h")
                .unwrap_err(),
            DataError::NonFinite { .. }
        ));
        assert!(matches!(
            TimeSeries::new(array![[1.0, 2.0]], vec!["a".into(), "a".into()], "1h").unwrap_err(),
            DataError::BadColumnNames(_)
        ));
        assert!(matches!(
            TimeSeries::new(array![[1.0]], vec![], "1h").unwrap_err(),
            DataError::ColumnNameCount { .. }
        ));
    }
}
