//! `hibench` — benchmark harness for long-horizon forecasting baselines.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hibench::metrics::VariateMode;
use hibench::report::TableFormat;
use hibench_cli::config::HarnessConfig;
use hibench_cli::pipeline::{
    render_reports_file, run_detect_period, run_eval, run_select, write_eval_outputs,
    write_selection_report, EvalOptions,
};
use hibench_cli::CliError;

#[derive(Parser)]
#[command(
    name = "hibench",
    about = "Benchmark harness and naive baselines for long-horizon time-series forecasting",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full evaluation pipeline and write reports and tables.
    Eval {
        /// Harness config file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Evaluate only this dataset.
        #[arg(long)]
        dataset: Option<String>,
        /// Evaluate only this variate mode (uni | multi).
        #[arg(long)]
        mode: Option<String>,
        /// Table format (plain | markdown | delimited); overrides config.
        #[arg(long)]
        format: Option<String>,
        /// Output directory; overrides config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads for (dataset, mode, horizon) cells.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Validation-driven predictor selection for one task.
    Select {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dataset: String,
        /// Variate mode (uni | multi).
        #[arg(long, default_value = "uni")]
        mode: String,
        /// Horizon; defaults to the first configured horizon.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Autocorrelation period detection for one dataset column.
    DetectPeriod {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dataset: String,
        /// Column name; defaults to the dataset's target column.
        #[arg(long)]
        column: Option<String>,
    },
    /// Re-render comparison tables from a reports JSON file.
    Render {
        /// A reports.json written by `eval`.
        #[arg(long)]
        reports: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: String,
        #[arg(long)]
        mode: Option<String>,
        /// Write table files here instead of printing to stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn parse_mode(mode: &str) -> Result<VariateMode, CliError> {
    mode.parse().map_err(CliError::Config)
}

fn parse_format(format: &str) -> Result<TableFormat, CliError> {
    format.parse().map_err(CliError::Config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eval {
            config,
            dataset,
            mode,
            format,
            out_dir,
            jobs,
        } => {
            let config = HarnessConfig::load(&config)?;
            let opts = EvalOptions {
                dataset,
                mode: mode.as_deref().map(parse_mode).transpose()?,
                format: format.as_deref().map(parse_format).transpose()?,
                out_dir,
                jobs,
            };
            let output = run_eval(&config, &opts)?;
            let written = write_eval_outputs(&config, &opts, &output)?;
            println!(
                "evaluated {} reports across {} tables",
                output.reports.len(),
                output.tables.len()
            );
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Select {
            config,
            dataset,
            mode,
            horizon,
            out_dir,
        } => {
            let config = HarnessConfig::load(&config)?;
            let mode = parse_mode(&mode)?;
            let result = run_select(&config, &dataset, mode, horizon)?;
            let horizon = horizon.unwrap_or_else(|| {
                config
                    .dataset(&dataset)
                    .map(|d| d.horizon_list()[0])
                    .expect("dataset existence checked by run_select")
            });
            let out_dir = out_dir.unwrap_or_else(|| config.output.out_dir.clone());
            let path = write_selection_report(&config, &out_dir, &dataset, mode, horizon, &result)?;
            println!("chosen: {}", result.chosen);
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::DetectPeriod {
            config,
            dataset,
            column,
        } => {
            let config = HarnessConfig::load(&config)?;
            let estimate = run_detect_period(&config, &dataset, column.as_deref())?;
            let json = serde_json::to_string(&estimate)
                .map_err(|e| CliError::Runtime(format!("cannot serialize estimate: {e}")))?;
            println!("{json}");
            Ok(())
        }
        Command::Render {
            reports,
            format,
            mode,
            out_dir,
        } => {
            let format = parse_format(&format)?;
            let mode = mode.as_deref().map(parse_mode).transpose()?;
            let tables = render_reports_file(&reports, format, mode)?;
            match out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| {
                        CliError::Runtime(format!("cannot create {}: {e}", dir.display()))
                    })?;
                    for (mode, text) in tables {
                        let path = dir.join(format!("table_{mode}.{}", format.extension()));
                        std::fs::write(&path, text).map_err(|e| {
                            CliError::Runtime(format!("cannot write {}: {e}", path.display()))
                        })?;
                        println!("wrote {}", path.display());
                    }
                }
                None => {
                    for (_, text) in tables {
                        print!("{text}");
                    }
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error {error}");
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
