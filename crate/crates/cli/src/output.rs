//! CSV and plot-script writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

/// Full double precision: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Gnuplot script drawing columns `first..=last` of `csv` against column 1.
#[allow(clippy::too_many_arguments)]
pub fn write_plot_script(
    path: &Path,
    csv: &str,
    image: &str,
    first: usize,
    last: usize,
    xlabel: &str,
    ylabel: &str,
    logx: bool,
) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "# gnuplot {}", path.file_name().and_then(|f| f.to_str()).unwrap_or(""))?;
    writeln!(s, "set datafile separator ','")?;
    writeln!(s, "set key autotitle columnhead")?;
    writeln!(s, "set terminal pngcairo size 900,600")?;
    writeln!(s, "set output '{image}'")?;
    if logx {
        writeln!(s, "set logscale x")?;
    }
    writeln!(s, "set xlabel '{xlabel}'")?;
    writeln!(s, "set ylabel '{ylabel}'")?;
    writeln!(s, "set grid")?;
    writeln!(s, "plot for [col={first}:{last}] '{csv}' using 1:col with linespoints pointsize 0.4")?;
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}
