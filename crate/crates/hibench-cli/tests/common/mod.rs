//! Shared fixtures for the CLI integration tests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Writes a two-column CSV (`a`, `OT`) with a timestamp column; both data
/// columns are phase-shifted sinusoids of the given period plus a slow
/// drift so no column is constant.
pub fn write_sine_csv(path: &Path, rows: usize, period: usize) {
    let mut text = String::from("date,a,OT\n");
    for i in 0..rows {
        let phase = std::f64::consts::TAU * i as f64 / period as f64;
        let _ = writeln!(
            text,
            "2016-07-01 {i},{},{}",
            phase.sin() + 1e-4 * i as f64,
            2.0 * phase.cos() + 1.0
        );
    }
    std::fs::write(path, text).unwrap();
}

/// Writes a config with one dataset named `ETTh1` (2 data columns) so the
/// bundled reference tables cover it, and returns the config path.
pub fn write_fixture_config(dir: &Path, csv_name: &str, horizons: &[usize]) -> PathBuf {
    let horizon_list = horizons
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    let text = format!(
        "[output]\nformat = \"markdown\"\nout_dir = \"{}\"\n\n\
         [[dataset]]\nname = \"ETTh1\"\npath = \"{csv_name}\"\ncolumns = 2\n\
         horizons = [{horizon_list}]\n",
        dir.join("out").display()
    );
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}
