//! Comparison tables: published competitor rows, the harness's inertia
//! row, per-column best marking and a signed improvement row.
//!
//! Metric cells render at 3 decimal places and improvements as whole
//! signed percentages; the delimited format keeps full precision so a
//! rendered table can be parsed back without loss. Rendering is pure
//! string building: the same table always produces the same bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::metrics::{
    best_reference, relative_improvement, MetricKind, MetricReport, RefKey, ReferenceScores,
    VariateMode,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no inertia reports for mode {0}: a comparison table needs an HI row")]
    NoHiReports(VariateMode),
    #[error("duplicate HI report for cell {dataset}-{horizon}")]
    DuplicateHiCell { dataset: String, horizon: usize },
    #[error("reference table has no entry for model {model:?} at {key}")]
    MissingReference { model: String, key: RefKey },
    #[error(transparent)]
    Metric(#[from] crate::metrics::MetricError),
    #[error("cannot parse table line {line}: {message}")]
    ParseError { line: usize, message: String },
}

/// One (dataset, horizon) table column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnKey {
    pub dataset: String,
    pub horizon: usize,
}

impl ColumnKey {
    fn label(&self) -> String {
        format!("{}-{}", self.dataset, self.horizon)
    }
}

/// MSE and MAE values of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricPair {
    pub mse: f64,
    pub mae: f64,
}

impl MetricPair {
    fn get(&self, metric: MetricKind) -> f64 {
        match metric {
            MetricKind::Mse => self.mse,
            MetricKind::Mae => self.mae,
        }
    }
}

/// One model's scores across all columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRow {
    pub model: String,
    pub cells: Vec<MetricPair>,
}

/// Row indices of the per-column best (lowest) values, ties resolved to
/// the earliest row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BestFlags {
    pub mse_row: usize,
    pub mae_row: usize,
}

impl BestFlags {
    fn get(&self, metric: MetricKind) -> usize {
        match metric {
            MetricKind::Mse => self.mse_row,
            MetricKind::Mae => self.mae_row,
        }
    }
}

/// A fully resolved comparison table: reference rows in published order,
/// the inertia row last, a signed improvement row and per-column best
/// flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub mode: VariateMode,
    pub columns: Vec<ColumnKey>,
    pub rows: Vec<ModelRow>,
    /// Signed improvement fractions of the inertia row versus the best
    /// reference, per column.
    pub improvement: Vec<MetricPair>,
    pub best: Vec<BestFlags>,
}

/// Output encodings for [`render`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Plain,
    Markdown,
    Delimited,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" | "txt" => Ok(TableFormat::Plain),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            "delimited" | "csv" => Ok(TableFormat::Delimited),
            other => Err(format!("unknown table format {other:?}")),
        }
    }
}

impl TableFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            TableFormat::Plain => "txt",
            TableFormat::Markdown => "md",
            TableFormat::Delimited => "csv",
        }
    }
}

const HI_ROW: &str = "HI";
const IMPROVE_ROW: &str = "Improve";

/// Assembles the comparison table for one variate mode from the harness's
/// inertia reports and the bundled reference scores.
///
/// Columns appear in the order the reports were produced; reference rows
/// keep their published order; exactly one HI report is required per
/// column.
pub fn build_table(
    mode: VariateMode,
    reports: &[MetricReport],
    refs: &ReferenceScores,
) -> Result<ComparisonTable, ReportError> {
    let hi_reports: Vec<&MetricReport> = reports
        .iter()
        .filter(|r| r.mode == mode && r.predictor == "hi")
        .collect();
    if hi_reports.is_empty() {
        return Err(ReportError::NoHiReports(mode));
    }

    let mut columns: Vec<ColumnKey> = Vec::new();
    let mut hi_cells: Vec<MetricPair> = Vec::new();
    for report in &hi_reports {
        let key = ColumnKey {
            dataset: report.dataset.clone(),
            horizon: report.horizon,
        };
        if columns.contains(&key) {
            return Err(ReportError::DuplicateHiCell {
                dataset: key.dataset,
                horizon: key.horizon,
            });
        }
        columns.push(key);
        hi_cells.push(MetricPair {
            mse: report.mse,
            mae: report.mae,
        });
    }

    let mut rows: Vec<ModelRow> = Vec::new();
    for model in refs.models(mode) {
        let mut cells = Vec::with_capacity(columns.len());
        for column in &columns {
            let mut pair = MetricPair {
                mse: f64::NAN,
                mae: f64::NAN,
            };
            for metric in [MetricKind::Mse, MetricKind::Mae] {
                let key = RefKey {
                    dataset: column.dataset.clone(),
                    mode,
                    horizon: column.horizon,
                    metric,
                };
                let entries = refs
                    .get(&key)
                    .ok_or_else(|| ReportError::MissingReference {
                        model: model.clone(),
                        key: key.clone(),
                    })?;
                let value = entries
                    .iter()
                    .find(|(m, _)| m == model)
                    .ok_or_else(|| ReportError::MissingReference {
                        model: model.clone(),
                        key: key.clone(),
                    })?
                    .1;
                match metric {
                    MetricKind::Mse => pair.mse = value,
                    MetricKind::Mae => pair.mae = value,
                }
            }
            cells.push(pair);
        }
        rows.push(ModelRow {
            model: model.clone(),
            cells,
        });
    }
    rows.push(ModelRow {
        model: HI_ROW.to_string(),
        cells: hi_cells,
    });

    let mut improvement = Vec::with_capacity(columns.len());
    for (c, column) in columns.iter().enumerate() {
        let hi = &rows.last().expect("HI row was just pushed").cells[c];
        let mut pair = MetricPair {
            mse: f64::NAN,
            mae: f64::NAN,
        };
        for metric in [MetricKind::Mse, MetricKind::Mae] {
            let key = RefKey {
                dataset: column.dataset.clone(),
                mode,
                horizon: column.horizon,
                metric,
            };
            let (_, best) = best_reference(refs, &key)?;
            let value = relative_improvement(best, hi.get(metric))?;
            match metric {
                MetricKind::Mse => pair.mse = value,
                MetricKind::Mae => pair.mae = value,
            }
        }
        improvement.push(pair);
    }

    let best = compute_best_flags(&rows, columns.len());
    Ok(ComparisonTable {
        mode,
        columns,
        rows,
        improvement,
        best,
    })
}

fn compute_best_flags(rows: &[ModelRow], column_count: usize) -> Vec<BestFlags> {
    (0..column_count)
        .map(|c| {
            let argmin = |metric: MetricKind| {
                let mut best = 0usize;
                for (i, row) in rows.iter().enumerate() {
                    if row.cells[c].get(metric) < rows[best].cells[c].get(metric) {
                        best = i;
                    }
                }
                best
            };
            BestFlags {
                mse_row: argmin(MetricKind::Mse),
                mae_row: argmin(MetricKind::Mae),
            }
        })
        .collect()
}

fn fmt_metric(value: f64) -> String {
    format!("{value:.3}")
}

/// Signed whole-percentage rendering with the colour word the published
/// tables encode as cell colour: nonnegative improvements are "green",
/// negative ones "red".
fn fmt_improvement(value: f64) -> String {
    let pct = (value * 100.0).round().abs();
    let sign = if value < 0.0 { "-" } else { "+" };
    let colour = if value < 0.0 { "red" } else { "green" };
    format!("{sign}{pct:.0}% ({colour})")
}

/// Cells whose rounded value matches the rounded best are bolded along
/// with the best; the footnote lists such columns.
fn rounded_tie_rows(table: &ComparisonTable, c: usize, metric: MetricKind) -> Vec<usize> {
    let best_row = table.best[c].get(metric);
    let best_text = fmt_metric(table.rows[best_row].cells[c].get(metric));
    table
        .rows
        .iter()
        .enumerate()
        .filter(|(i, row)| *i != best_row && fmt_metric(row.cells[c].get(metric)) == best_text)
        .map(|(i, _)| i)
        .collect()
}

fn tie_footnote(table: &ComparisonTable) -> Option<String> {
    let mut tied_columns = Vec::new();
    for (c, column) in table.columns.iter().enumerate() {
        for metric in [MetricKind::Mse, MetricKind::Mae] {
            if !rounded_tie_rows(table, c, metric).is_empty() {
                tied_columns.push(format!("{} {}", column.label(), metric));
            }
        }
    }
    if tied_columns.is_empty() {
        None
    } else {
        Some(format!(
            "best-value tie at 3 decimals in: {}",
            tied_columns.join(", ")
        ))
    }
}

/// Renders a table to text. Identical tables yield identical bytes.
pub fn render(table: &ComparisonTable, format: TableFormat) -> String {
    match format {
        TableFormat::Markdown => render_markdown(table),
        TableFormat::Plain => render_plain(table),
        TableFormat::Delimited => render_delimited(table),
    }
}

fn is_bold(table: &ComparisonTable, row: usize, c: usize, metric: MetricKind) -> bool {
    table.best[c].get(metric) == row || rounded_tie_rows(table, c, metric).contains(&row)
}

fn render_markdown(table: &ComparisonTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Comparison table ({})", table.mode);
    out.push('\n');
    let mut header = String::from("| Model | Metric |");
    let mut rule = String::from("|---|---|");
    for column in &table.columns {
        let _ = write!(header, " {} |", column.label());
        rule.push_str("---|");
    }
    out.push_str(&header);
    out.push('\n');
    out.push_str(&rule);
    out.push('\n');
    for (i, row) in table.rows.iter().enumerate() {
        for metric in [MetricKind::Mse, MetricKind::Mae] {
            let _ = write!(
                out,
                "| {} | {} |",
                row.model,
                metric.to_string().to_uppercase()
            );
            for (c, cell) in row.cells.iter().enumerate() {
                let text = fmt_metric(cell.get(metric));
                if is_bold(table, i, c, metric) {
                    let _ = write!(out, " **{text}** |");
                } else {
                    let _ = write!(out, " {text} |");
                }
            }
            out.push('\n');
        }
    }
    for metric in [MetricKind::Mse, MetricKind::Mae] {
        let _ = write!(
            out,
            "| {IMPROVE_ROW} | {} |",
            metric.to_string().to_uppercase()
        );
        for pair in &table.improvement {
            let _ = write!(out, " {} |", fmt_improvement(pair.get(metric)));
        }
        out.push('\n');
    }
    if let Some(note) = tie_footnote(table) {
        out.push('\n');
        let _ = writeln!(out, "Note: {note}.");
    }
    out
}

fn render_plain(table: &ComparisonTable) -> String {
    // assemble all cell texts first, then pad to column widths
    let mut grid: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["Model".to_string(), "Metric".to_string()];
    header.extend(table.columns.iter().map(|c| c.label()));
    grid.push(header);
    for (i, row) in table.rows.iter().enumerate() {
        for metric in [MetricKind::Mse, MetricKind::Mae] {
            let mut line = vec![row.model.clone(), metric.to_string().to_uppercase()];
            for (c, cell) in row.cells.iter().enumerate() {
                let text = fmt_metric(cell.get(metric));
                line.push(if is_bold(table, i, c, metric) {
                    format!("*{text}")
                } else {
                    text
                });
            }
            grid.push(line);
        }
    }
    for metric in [MetricKind::Mse, MetricKind::Mae] {
        let mut line = vec![IMPROVE_ROW.to_string(), metric.to_string().to_uppercase()];
        for pair in &table.improvement {
            line.push(fmt_improvement(pair.get(metric)));
        }
        grid.push(line);
    }

    let columns = grid[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|c| grid.iter().map(|line| line[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "Comparison table ({})", table.mode);
    for line in &grid {
        for (c, cell) in line.iter().enumerate() {
            if c == 0 {
                let _ = write!(out, "{cell:<width$}", width = widths[c]);
            } else {
                let _ = write!(out, "  {cell:>width$}", width = widths[c]);
            }
        }
        out.push('\n');
    }
    if let Some(note) = tie_footnote(table) {
        let _ = writeln!(out, "Note: {note}.");
    }
    out
}

fn render_delimited(table: &ComparisonTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# comparison table mode={}", table.mode);
    let mut header = String::from("model,metric");
    for column in &table.columns {
        let _ = write!(header, ",{}", column.label());
    }
    out.push_str(&header);
    out.push('\n');
    for row in &table.rows {
        for metric in [MetricKind::Mse, MetricKind::Mae] {
            let _ = write!(out, "{},{}", row.model, metric);
            for cell in &row.cells {
                let _ = write!(out, ",{}", cell.get(metric));
            }
            out.push('\n');
        }
    }
    for metric in [MetricKind::Mse, MetricKind::Mae] {
        let _ = write!(out, "{IMPROVE_ROW},{metric}");
        for pair in &table.improvement {
            let _ = write!(out, ",{}", pair.get(metric));
        }
        out.push('\n');
    }
    out
}

/// Parses the delimited rendering back into a table. Numeric values
/// round-trip exactly; best flags are recomputed (they are a pure function
/// of the cell values).
pub fn parse_delimited(text: &str) -> Result<ComparisonTable, ReportError> {
    let mut mode: Option<VariateMode> = None;
    let mut columns: Vec<ColumnKey> = Vec::new();
    let mut rows: Vec<ModelRow> = Vec::new();
    let mut improve: Vec<Vec<f64>> = Vec::new(); // [mse values, mae values]
    let mut saw_header = false;

    for (i, line) in text.lines().enumerate() {
        let bad = |message: String| ReportError::ParseError {
            line: i + 1,
            message,
        };
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(m) = rest
                .split_whitespace()
                .find_map(|t| t.strip_prefix("mode="))
            {
                mode = Some(m.parse().map_err(bad)?);
            }
            continue;
        }
        if !saw_header {
            saw_header = true;
            for label in line.split(',').skip(2) {
                let (dataset, horizon) = label
                    .rsplit_once('-')
                    .ok_or_else(|| bad(format!("bad column label {label:?}")))?;
                columns.push(ColumnKey {
                    dataset: dataset.to_string(),
                    horizon: horizon
                        .parse()
                        .map_err(|e| bad(format!("bad horizon in {label:?}: {e}")))?,
                });
            }
            continue;
        }
        let mut fields = line.split(',');
        let model = fields.next().ok_or_else(|| bad("missing model".into()))?;
        let metric: MetricKind = fields
            .next()
            .ok_or_else(|| bad("missing metric".into()))?
            .parse()
            .map_err(bad)?;
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| bad(format!("bad value {f:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        if values.len() != columns.len() {
            return Err(bad(format!(
                "expected {} values, found {}",
                columns.len(),
                values.len()
            )));
        }
        if model == IMPROVE_ROW {
            improve.push(values);
            continue;
        }
        // MSE line creates the row, the matching MAE line completes it
        match metric {
            MetricKind::Mse => rows.push(ModelRow {
                model: model.to_string(),
                cells: values
                    .into_iter()
                    .map(|mse| MetricPair { mse, mae: f64::NAN })
                    .collect(),
            }),
            MetricKind::Mae => {
                let row = rows
                    .iter_mut()
                    .rev()
                    .find(|r| r.model == model)
                    .ok_or_else(|| bad(format!("mae line for unknown model {model:?}")))?;
                for (cell, mae) in row.cells.iter_mut().zip(values) {
                    cell.mae = mae;
                }
            }
        }
    }

    let mode = mode.ok_or_else(|| ReportError::ParseError {
        line: 0,
        message: "missing mode header comment".into(),
    })?;
    if improve.len() != 2 || rows.is_empty() {
        return Err(ReportError::ParseError {
            line: 0,
            message: "table needs model rows and one Improve row per metric".into(),
        });
    }
    let improvement = improve[0]
        .iter()
        .zip(&improve[1])
        .map(|(&mse, &mae)| MetricPair { mse, mae })
        .collect();
    let best = compute_best_flags(&rows, columns.len());
    Ok(ComparisonTable {
        mode,
        columns,
        rows,
        improvement,
        best,
    })
}
