//! `toa-outage`: SPEB outage curves, anchor-count design and validation runs.

mod commands;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;

const AFTER_HELP: &str = "\
Exit codes: 0 success, 2 argument error, 3 numerical non-convergence,
4 validation assertion failure, 1 any other failure (for example I/O).

Every run writes manifest.json into its output directory; `toa-outage rerun`
replays it and reproduces the CSV files byte for byte.";

#[derive(Debug, Parser)]
#[command(name = "toa-outage", version, about, after_help = AFTER_HELP)]
struct Cli {
    /// Worker threads (defaults to the number of cores). Never changes the output.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// SPEB ccdf curves for one anchor configuration.
    ///
    /// Writes ccdf.csv with header `speb_times_ts,<method columns...>` where
    /// the method columns appear in the order requested (`bounds` expands to
    /// `gdop_lower,gdop_upper`), plus plot_ccdf.gp and manifest.json.
    Ccdf(CcdfArgs),
    /// Smallest anchor count meeting an outage target.
    ///
    /// Writes design.csv with header
    /// `n,speb_support_min,pruned,ccdf_approx,meets_target`, design.json and
    /// manifest.json.
    Design(DesignArgs),
    /// KS distances of every method against Monte Carlo over a parameter sweep.
    ///
    /// Writes ks.csv with header `n,d_min,d_max,approx,gdop,gdop_lower,gdop_upper`,
    /// plot_ks.gp and manifest.json.
    Validate(ValidateArgs),
    /// Analytic and empirical moments of the geometry factor per anchor count.
    ///
    /// Writes moments.csv with header
    /// `n,mean_yn_analytic,mean_yn_empirical,var_yn_empirical,infeasibility_lhs,m_opt,v_opt`
    /// and manifest.json.
    Moments(MomentsArgs),
    /// Replays a run from its manifest into a new output directory.
    #[serde(skip)]
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct CcdfArgs {
    /// Number of anchors.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub dmin: f64,
    #[arg(long, default_value_t = 10.0)]
    pub dmax: f64,
    /// Ranging constant T_s, with SPEB = 4/(T_s X Y).
    #[arg(long, default_value_t = 1.0)]
    pub ts: f64,
    /// Comma-separated subset of mc,approx,gdop,bounds.
    #[arg(long, default_value = "mc,approx,gdop,bounds")]
    pub methods: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Master seed; drawn from the OS and recorded when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Smallest T_s*SPEB abscissa (requires --u-max).
    #[arg(long, requires = "u_max")]
    pub u_min: Option<f64>,
    /// Largest T_s*SPEB abscissa (requires --u-min).
    #[arg(long, requires = "u_min")]
    pub u_max: Option<f64>,
    /// Number of log-spaced abscissae (with --u-min/--u-max).
    #[arg(long, requires = "u_min")]
    pub u_points: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct DesignArgs {
    /// SPEB threshold in m^2.
    #[arg(long)]
    pub eps_th: f64,
    /// Target outage probability in (0, 1).
    #[arg(long)]
    pub p_out: f64,
    #[arg(long, default_value_t = 1.0)]
    pub dmin: f64,
    #[arg(long, default_value_t = 10.0)]
    pub dmax: f64,
    #[arg(long, default_value_t = 1.0)]
    pub ts: f64,
    #[arg(long, default_value_t = 32)]
    pub n_max: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct ValidateArgs {
    /// Anchor counts, `a..b` (inclusive) or a single value.
    #[arg(long, default_value = "3..8")]
    pub n_range: String,
    #[arg(long, default_value_t = 1.0)]
    pub dmin: f64,
    /// Comma-separated outer radii.
    #[arg(long, default_value = "10")]
    pub dmax_sweep: String,
    #[arg(long, default_value_t = 1.0)]
    pub ts: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct MomentsArgs {
    /// Anchor counts, `a..b` (inclusive) or a single value.
    #[arg(long, default_value = "3..8")]
    pub n_range: String,
    #[arg(long, default_value_t = 1.0)]
    pub dmin: f64,
    #[arg(long, default_value_t = 10.0)]
    pub dmax: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// manifest.json of the run to replay.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory of the replay.
    #[arg(long)]
    pub out: PathBuf,
}

/// Bad input detected by the front end (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Raised when a validation run violates one of its checks (exit code 4).
#[derive(Debug)]
pub struct ValidationFailed(pub Vec<String>);

impl std::fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} validation check(s) failed", self.0.len())?;
        for line in &self.0 {
            write!(f, "\n  {line}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<toa_outage::Error>() {
            return if e.is_numerical() { 3 } else { 2 };
        }
        if cause.is::<UsageError>() {
            return 2;
        }
        if cause.is::<ValidationFailed>() {
            return 4;
        }
    }
    1
}

fn run(cli: Cli, argv: Vec<String>) -> Result<()> {
    let (command, threads) = match cli.command {
        Command::Rerun(r) => {
            let manifest = RunManifest::load(&r.manifest)?;
            (manifest.replay(r.out)?, cli.threads)
        }
        other => (other, cli.threads),
    };
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            if t == 0 {
                return Err(UsageError("--threads must be at least 1".into()).into());
            }
            b = b.num_threads(t);
        }
        b.build()?
    };
    pool.install(|| commands::execute(command, argv, threads))
}

/// Parses `args` (program name first), runs the command and returns the exit code.
fn main_with_args<I: IntoIterator<Item = String>>(args: I) -> u8 {
    let argv: Vec<String> = args.into_iter().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli, argv) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code(&err)
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(main_with_args(std::env::args()))
}

#[cfg(test)]
mod cli_tests;
