//! Pipeline stages behind the subcommands: ingest → split → scale →
//! enumerate → predict → score → report.
//!
//! Evaluation is deterministic end to end: cells run independently (in
//! declared order, optionally on a thread pool), each cell's window loop
//! is sequential, and metric reduction uses the fixed-chunk pairwise tree,
//! so results do not depend on the job count. Output files are only
//! written after every cell has succeeded.

use std::path::{Path, PathBuf};

use hibench::analysis::{
    detect_period, select_predictor, PeriodEstimate, SelectionResult, SelectorConfig,
};
use hibench::baselines::Predictor;
use hibench::data::{
    apply_scaler, fit_scaler, load_table, select_targets, split, TableSchema, TargetMode,
    TimeSeries,
};
use hibench::metrics::{ErrorAccumulator, MetricReport, RefKey, ReferenceScores, VariateMode};
use hibench::report::{build_table, render, ComparisonTable, TableFormat};
use hibench::windowing::{enumerate_windows, slice, ForecastTask};
use hibench::MetricKind;
use rayon::prelude::*;

use crate::config::{DatasetConfig, HarnessConfig};
use crate::CliError;

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub dataset: Option<String>,
    pub mode: Option<VariateMode>,
    pub format: Option<TableFormat>,
    pub out_dir: Option<PathBuf>,
    pub jobs: usize,
}

/// Everything an evaluation run produces, before any file is written.
#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub reports: Vec<MetricReport>,
    pub tables: Vec<(VariateMode, ComparisonTable)>,
}

fn data_err(dataset: &str) -> impl Fn(hibench::data::DataError) -> CliError + '_ {
    move |e| CliError::Data(format!("dataset {dataset}: {e}"))
}

fn runtime_err(context: &str) -> impl Fn(&dyn std::fmt::Display) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{context}: {e}"))
}

fn schema_of(dataset: &DatasetConfig) -> TableSchema {
    TableSchema {
        columns: dataset.columns,
        timestamp_column: dataset.timestamp_column,
        sample_rate: dataset
            .sample_rate
            .clone()
            .unwrap_or_else(|| "unspecified".to_string()),
    }
}

fn load_dataset(dataset: &DatasetConfig) -> Result<TimeSeries, CliError> {
    load_table(&dataset.path, &schema_of(dataset)).map_err(data_err(&dataset.name))
}

/// The univariate target: the configured column, or the last column.
fn target_column_name(dataset: &DatasetConfig, ts: &TimeSeries) -> String {
    dataset.target.clone().unwrap_or_else(|| {
        ts.column_names()
            .last()
            .expect("a validated series has at least one column")
            .clone()
    })
}

fn restrict_to_mode(
    full: &TimeSeries,
    dataset: &DatasetConfig,
    mode: VariateMode,
) -> Result<TimeSeries, CliError> {
    let target_mode = match mode {
        VariateMode::Univariate => TargetMode::Univariate(target_column_name(dataset, full)),
        VariateMode::Multivariate => TargetMode::Multivariate,
    };
    select_targets(full, &target_mode).map_err(data_err(&dataset.name))
}

/// Scores `predictors` on every test window in scaled space. The training
/// segment is touched exactly once, to fit the scaler.
pub fn evaluate_segments(
    train: &TimeSeries,
    test: &TimeSeries,
    task: &ForecastTask,
    predictors: &[Predictor],
    dataset: &str,
    mode: VariateMode,
) -> Result<Vec<MetricReport>, CliError> {
    let context = format!("dataset {dataset} {mode} horizon {}", task.horizon);
    let scaler = fit_scaler(train).map_err(data_err(dataset))?;
    let scaled_test = apply_scaler(test, &scaler).map_err(data_err(dataset))?;

    let windows =
        enumerate_windows(scaled_test.num_rows(), task).map_err(|e| runtime_err(&context)(&e))?;
    let target_columns = task
        .target_mode
        .resolve_columns(&scaled_test)
        .map_err(data_err(dataset))?;

    let mut accumulators: Vec<ErrorAccumulator> =
        predictors.iter().map(|_| ErrorAccumulator::new()).collect();
    for window in &windows {
        let (input, truth) =
            slice(&scaled_test, window, task).map_err(|e| runtime_err(&context)(&e))?;
        for (predictor, acc) in predictors.iter().zip(accumulators.iter_mut()) {
            let forecast = predictor
                .forecast(&input, &target_columns, task.horizon)
                .map_err(|e| runtime_err(&context)(&e))?;
            acc.push(&forecast, &truth.view())
                .map_err(|e| runtime_err(&context)(&e))?;
        }
    }

    predictors
        .iter()
        .zip(accumulators)
        .map(|(predictor, acc)| {
            Ok(MetricReport {
                dataset: dataset.to_string(),
                predictor: predictor.name(),
                mode,
                horizon: task.horizon,
                lookback: task.lookback,
                offset: task.offset,
                stride: task.stride,
                window_count: acc.window_count(),
                mse: acc.mse().map_err(|e| runtime_err(&context)(&e))?,
                mae: acc.mae().map_err(|e| runtime_err(&context)(&e))?,
            })
        })
        .collect()
}

/// One (dataset, mode, horizon) cell: restrict to the mode's targets,
/// split, then score on the test segment.
pub fn evaluate_cell(
    full: &TimeSeries,
    dataset: &DatasetConfig,
    mode: VariateMode,
    horizon: usize,
    predictors: &[Predictor],
) -> Result<Vec<MetricReport>, CliError> {
    let selected = restrict_to_mode(full, dataset, mode)?;
    let (train, _val, test) =
        split(&selected, &dataset.split_spec()?).map_err(data_err(&dataset.name))?;
    let task = ForecastTask {
        lookback: dataset.lookback_for(horizon),
        horizon,
        offset: dataset.offset,
        stride: dataset.stride,
        target_mode: TargetMode::Multivariate,
    };
    evaluate_segments(&train, &test, &task, predictors, &dataset.name, mode)
}

fn parse_predictors(specs: &[String]) -> Result<Vec<Predictor>, CliError> {
    specs
        .iter()
        .map(|s| Predictor::parse(s).map_err(|e| CliError::Config(format!("predictor {s:?}: {e}"))))
        .collect()
}

/// Whether the bundled reference tables cover a report's cell.
fn covered_by_references(report: &MetricReport, refs: &ReferenceScores) -> bool {
    [MetricKind::Mse, MetricKind::Mae].iter().all(|&metric| {
        refs.get(&RefKey {
            dataset: report.dataset.clone(),
            mode: report.mode,
            horizon: report.horizon,
            metric,
        })
        .is_some()
    })
}

/// Comparison tables for every mode that has reference-covered HI reports.
/// Cells outside the bundled reference tables stay in the JSON reports but
/// cannot appear in a comparison table.
pub fn build_tables(
    reports: &[MetricReport],
    mode_filter: Option<VariateMode>,
) -> Result<Vec<(VariateMode, ComparisonTable)>, CliError> {
    let refs = ReferenceScores::bundled();
    let mut tables = Vec::new();
    for mode in [VariateMode::Univariate, VariateMode::Multivariate] {
        if mode_filter.is_some_and(|m| m != mode) {
            continue;
        }
        let covered: Vec<MetricReport> = reports
            .iter()
            .filter(|r| r.mode == mode && r.predictor == "hi" && covered_by_references(r, refs))
            .cloned()
            .collect();
        if covered.is_empty() {
            continue;
        }
        let table =
            build_table(mode, &covered, refs).map_err(|e| runtime_err("comparison table")(&e))?;
        tables.push((mode, table));
    }
    Ok(tables)
}

/// Runs the full pipeline for every configured (dataset, mode, horizon)
/// cell. Nothing is written; pair with [`write_eval_outputs`].
pub fn run_eval(config: &HarnessConfig, opts: &EvalOptions) -> Result<EvalOutput, CliError> {
    let datasets: Vec<&DatasetConfig> = match &opts.dataset {
        Some(name) => vec![config.dataset(name)?],
        None => config.datasets.iter().collect(),
    };
    if datasets.is_empty() {
        return Err(CliError::Config("no datasets configured".to_string()));
    }
    let predictors = parse_predictors(&config.eval.predictors)?;
    if predictors.is_empty() {
        return Err(CliError::Config("no predictors configured".to_string()));
    }

    struct Cell<'a> {
        dataset: &'a DatasetConfig,
        series: &'a TimeSeries,
        mode: VariateMode,
        horizon: usize,
    }

    let mut loaded = Vec::with_capacity(datasets.len());
    for dataset in &datasets {
        loaded.push(load_dataset(dataset)?);
    }

    let mut cells = Vec::new();
    for (dataset, series) in datasets.iter().zip(&loaded) {
        for mode in dataset.variate_modes()? {
            if opts.mode.is_some_and(|m| m != mode) {
                continue;
            }
            for horizon in dataset.horizon_list() {
                cells.push(Cell {
                    dataset,
                    series,
                    mode,
                    horizon,
                });
            }
        }
    }
    if cells.is_empty() {
        return Err(CliError::Config(
            "nothing to evaluate: dataset/mode filters exclude every cell".to_string(),
        ));
    }

    let run_cell = |cell: &Cell| {
        evaluate_cell(
            cell.series,
            cell.dataset,
            cell.mode,
            cell.horizon,
            &predictors,
        )
    };
    let per_cell: Vec<Vec<MetricReport>> = if opts.jobs <= 1 {
        cells.iter().map(run_cell).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| CliError::Runtime(format!("cannot build thread pool: {e}")))?;
        pool.install(|| cells.par_iter().map(run_cell).collect::<Result<_, _>>())?
    };

    let reports: Vec<MetricReport> = per_cell.into_iter().flatten().collect();
    let tables = if predictors.contains(&Predictor::Hi) {
        build_tables(&reports, opts.mode)?
    } else {
        Vec::new()
    };
    Ok(EvalOutput { reports, tables })
}

/// Writes the effective config echo, the JSON reports and one table file
/// per mode. All contents are assembled before the first write so a failed
/// run leaves no partial outputs.
pub fn write_eval_outputs(
    config: &HarnessConfig,
    opts: &EvalOptions,
    output: &EvalOutput,
) -> Result<Vec<PathBuf>, CliError> {
    let out_dir = opts
        .out_dir
        .clone()
        .unwrap_or_else(|| config.output.out_dir.clone());
    let format = opts.format.unwrap_or_else(|| config.table_format());

    let mut files: Vec<(PathBuf, String)> = Vec::new();
    files.push((
        out_dir.join("effective_config.toml"),
        config.effective_toml()?,
    ));
    let mut reports_json = serde_json::to_string_pretty(&output.reports)
        .map_err(|e| CliError::Runtime(format!("cannot serialize reports: {e}")))?;
    reports_json.push('\n');
    files.push((out_dir.join("reports.json"), reports_json));
    for (mode, table) in &output.tables {
        files.push((
            out_dir.join(format!("table_{mode}.{}", format.extension())),
            render(table, format),
        ));
    }

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut written = Vec::with_capacity(files.len());
    for (path, contents) in files {
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

fn map_analysis_err(dataset: &str, e: hibench::analysis::AnalysisError) -> CliError {
    use hibench::analysis::AnalysisError as E;
    match e {
        E::InvalidRange { .. } | E::InvalidAlphaGrid(_) | E::NoCandidates => {
            CliError::Config(format!("selector: {e}"))
        }
        E::ConstantSeries
        | E::SeriesTooShort { .. }
        | E::NoValidationWindow { .. }
        | E::Data(_) => CliError::Data(format!("dataset {dataset}: {e}")),
        other => CliError::Runtime(format!("dataset {dataset}: {other}")),
    }
}

/// Resolves the configured selector candidates into base predictors.
/// `seasonal_naive:auto` takes the detected period of the training
/// segment's first target column and is dropped when no period fits the
/// lookback.
fn resolve_selector_bases(
    config: &HarnessConfig,
    train: &TimeSeries,
    task: &ForecastTask,
    dataset: &str,
) -> Result<Vec<Predictor>, CliError> {
    let selector = &config.selector;
    let mut bases = Vec::new();
    for candidate in &selector.candidates {
        if candidate == "seasonal_naive:auto" {
            let series = train.column(0);
            let max_lag = selector.acf_max_lag.min(series.len().saturating_sub(2));
            if max_lag < selector.acf_min_lag {
                continue;
            }
            let estimate = detect_period(
                &series,
                selector.acf_min_lag,
                max_lag,
                selector.acf_threshold,
            )
            .map_err(|e| map_analysis_err(dataset, e))?;
            if let Some(period) = estimate.period {
                if period <= task.lookback {
                    bases.push(Predictor::SeasonalNaive { period });
                }
            }
            continue;
        }
        let predictor = Predictor::parse(candidate)
            .map_err(|e| CliError::Config(format!("selector candidate {candidate:?}: {e}")))?;
        bases.push(predictor);
    }
    Ok(bases)
}

/// Validation-driven selection for one task, in the same scaled space the
/// evaluation uses.
pub fn run_select(
    config: &HarnessConfig,
    dataset_name: &str,
    mode: VariateMode,
    horizon: Option<usize>,
) -> Result<SelectionResult, CliError> {
    let dataset = config.dataset(dataset_name)?;
    let horizon = match horizon {
        Some(0) => return Err(CliError::Config("horizon must be >= 1".to_string())),
        Some(h) => h,
        None => dataset.horizon_list()[0],
    };

    let full = load_dataset(dataset)?;
    let selected = restrict_to_mode(&full, dataset, mode)?;
    let (train, val, _test) =
        split(&selected, &dataset.split_spec()?).map_err(data_err(dataset_name))?;
    let scaler = fit_scaler(&train).map_err(data_err(dataset_name))?;
    let scaled_train = apply_scaler(&train, &scaler).map_err(data_err(dataset_name))?;
    let scaled_val = apply_scaler(&val, &scaler).map_err(data_err(dataset_name))?;

    let task = ForecastTask {
        lookback: dataset.lookback_for(horizon),
        horizon,
        offset: dataset.offset,
        stride: dataset.stride,
        target_mode: TargetMode::Multivariate,
    };
    let bases = resolve_selector_bases(config, &scaled_train, &task, dataset_name)?;
    let selector_config = SelectorConfig {
        bases,
        alpha_grid: config.selector.alpha_grid.clone(),
        acf_min_lag: config.selector.acf_min_lag,
        acf_max_lag: config.selector.acf_max_lag,
        acf_threshold: config.selector.acf_threshold,
    };
    select_predictor(&scaled_train, &scaled_val, &task, &selector_config)
        .map_err(|e| map_analysis_err(dataset_name, e))
}

/// Writes a selection report (plus the effective-config echo) and returns
/// the report path.
pub fn write_selection_report(
    config: &HarnessConfig,
    out_dir: &Path,
    dataset: &str,
    mode: VariateMode,
    horizon: usize,
    result: &SelectionResult,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let echo_path = out_dir.join("effective_config.toml");
    std::fs::write(&echo_path, config.effective_toml()?)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", echo_path.display())))?;
    let path = out_dir.join(format!("selection_{dataset}_{mode}_{horizon}.json"));
    let mut json = serde_json::to_string_pretty(result)
        .map_err(|e| CliError::Runtime(format!("cannot serialize selection: {e}")))?;
    json.push('\n');
    std::fs::write(&path, json)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Period detection over one raw dataset column (autocorrelation is
/// invariant to the affine scaling, so raw values are fine).
pub fn run_detect_period(
    config: &HarnessConfig,
    dataset_name: &str,
    column: Option<&str>,
) -> Result<PeriodEstimate, CliError> {
    let dataset = config.dataset(dataset_name)?;
    let ts = load_dataset(dataset)?;
    let column_name = column
        .map(str::to_string)
        .unwrap_or_else(|| target_column_name(dataset, &ts));
    let index = ts.column_index(&column_name).ok_or_else(|| {
        CliError::Data(format!(
            "dataset {dataset_name}: unknown column {column_name:?}"
        ))
    })?;
    let series = ts.column(index);
    detect_period(
        &series,
        config.selector.acf_min_lag,
        config.selector.acf_max_lag,
        config.selector.acf_threshold,
    )
    .map_err(|e| map_analysis_err(dataset_name, e))
}

/// Re-renders comparison tables from a previously written reports file.
pub fn render_reports_file(
    reports_path: &Path,
    format: TableFormat,
    mode_filter: Option<VariateMode>,
) -> Result<Vec<(VariateMode, String)>, CliError> {
    let text = std::fs::read_to_string(reports_path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", reports_path.display())))?;
    let reports: Vec<MetricReport> = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("bad reports file {}: {e}", reports_path.display())))?;
    let tables = build_tables(&reports, mode_filter)?;
    if tables.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no reference-covered HI reports to tabulate",
            reports_path.display()
        )));
    }
    Ok(tables
        .into_iter()
        .map(|(mode, table)| (mode, render(&table, format)))
        .collect())
}
