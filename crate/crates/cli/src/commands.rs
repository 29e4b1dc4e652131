//! Subcommand bodies.

use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use toa_outage::montecarlo::{check_validation, default_u_grid, empirical_speb_ccdf, log_grid, validation_suite};
use toa_outage::outage::{moment_match, speb_ccdf_approx};
use toa_outage::speb::speb_support_min;
use toa_outage::{AnnulusModel, CurveLabel, MethodContext, MethodRegistry, QuadratureSpec};

use crate::manifest::RunManifest;
use crate::output::{fmt_f64, write_csv, write_plot_script};
use crate::{CcdfArgs, Command, DesignArgs, MomentsArgs, UsageError, ValidateArgs, ValidationFailed};

/// Grid size used with `--u-min/--u-max` when `--u-points` is absent.
const DEFAULT_U_POINTS: usize = 400;

impl Command {
    pub fn out_mut(&mut self) -> &mut PathBuf {
        match self {
            Command::Ccdf(a) => &mut a.out,
            Command::Design(a) => &mut a.out,
            Command::Validate(a) => &mut a.out,
            Command::Moments(a) => &mut a.out,
            Command::Rerun(a) => &mut a.out,
        }
    }

    fn seed_mut(&mut self) -> Option<&mut Option<u64>> {
        match self {
            Command::Ccdf(a) => Some(&mut a.seed),
            Command::Validate(a) => Some(&mut a.seed),
            Command::Moments(a) => Some(&mut a.seed),
            Command::Design(_) | Command::Rerun(_) => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Ccdf(_) => "ccdf",
            Command::Design(_) => "design",
            Command::Validate(_) => "validate",
            Command::Moments(_) => "moments",
            Command::Rerun(_) => "rerun",
        }
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Parses `a..b`, `a..=b` (both inclusive) or a single count.
pub fn parse_n_range(text: &str) -> Result<RangeInclusive<usize>> {
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| usage(format!("invalid anchor count `{s}` in --n-range")))
    };
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let n = parse(text)?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(usage(format!("empty --n-range `{text}`")));
    }
    Ok(lo..=hi)
}

pub fn parse_list(text: &str, flag: &str) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| usage(format!("invalid number `{s}` in {flag}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(usage(format!("{flag} is empty")));
    }
    Ok(values)
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Runs `command`, then records its manifest next to the outputs.
///
/// A validation failure is reported only after the outputs and the manifest
/// have been written.
pub fn execute(mut command: Command, argv: Vec<String>, threads: Option<usize>) -> Result<()> {
    let started_at = now();
    let (seed, seed_source) = match command.seed_mut() {
        Some(slot) => match *slot {
            Some(s) => (Some(s), "flag"),
            None => {
                let s = rand::random::<u64>();
                *slot = Some(s);
                (Some(s), "entropy")
            }
        },
        None => (None, "none"),
    };
    let out = command.out_mut().clone();
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let (outputs, failure) = match &command {
        Command::Ccdf(a) => (ccdf(a, &out)?, None),
        Command::Design(a) => (design(a, &out)?, None),
        Command::Validate(a) => validate(a, &out)?,
        Command::Moments(a) => (moments(a, &out)?, None),
        Command::Rerun(_) => return Err(usage("a manifest cannot record a rerun")),
    };
    let manifest = RunManifest {
        schema_version: crate::manifest::SCHEMA_VERSION,
        tool: "toa-outage".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command_line: argv,
        invocation: command.clone(),
        seed,
        seed_source: seed_source.into(),
        threads,
        started_at,
        finished_at: now(),
        outputs,
    };
    manifest.write(&out)?;
    eprintln!("{}: wrote {} (seed {})", command.name(), out.display(), seed.map_or("-".into(), |s| s.to_string()));
    match failure {
        Some(f) => Err(f.into()),
        None => Ok(()),
    }
}

fn ccdf(args: &CcdfArgs, out: &Path) -> Result<Vec<String>> {
    let model = AnnulusModel::new(args.dmin, args.dmax, args.n, args.ts)?;
    let seed = args.seed.expect("seed resolved before dispatch");
    let grid = match (args.u_min, args.u_max) {
        (Some(lo), Some(hi)) => {
            let points = args.u_points.unwrap_or(DEFAULT_U_POINTS);
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(usage("--u-min and --u-max must satisfy 0 < u-min < u-max"));
            }
            if points < 2 {
                return Err(usage("--u-points must be at least 2"));
            }
            log_grid(lo / args.ts, hi / args.ts, points)
        }
        _ => default_u_grid(&model, seed),
    };
    let registry = MethodRegistry::standard();
    let methods = registry.resolve(&args.methods)?;
    let quad = QuadratureSpec::default();
    let ctx = MethodContext {
        model: &model,
        quad: &quad,
        samples: args.samples,
        seed,
    };
    let mut curves = Vec::new();
    for m in methods {
        curves.extend(m.compute(&ctx, &grid).with_context(|| format!("method `{}`", m.name()))?);
    }
    let mut header = vec!["speb_times_ts".to_string()];
    header.extend(curves.iter().map(|c| c.label().to_string()));
    let rows: Vec<Vec<String>> = grid
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let mut row = vec![fmt_f64(u * args.ts)];
            row.extend(curves.iter().map(|c| fmt_f64(c.values()[i])));
            row
        })
        .collect();
    write_csv(&out.join("ccdf.csv"), &header, &rows)?;
    write_plot_script(
        &out.join("plot_ccdf.gp"),
        "ccdf.csv",
        "ccdf.png",
        2,
        header.len(),
        "T_s * SPEB",
        "P(SPEB > u)",
        true,
    )?;
    Ok(vec!["ccdf.csv".into(), "plot_ccdf.gp".into()])
}

#[derive(Debug, Serialize)]
struct DesignCandidate {
    n: usize,
    speb_support_min: f64,
    pruned: bool,
    ccdf_approx: f64,
    meets_target: bool,
}

#[derive(Debug, Serialize)]
struct DesignReport {
    eps_th: f64,
    p_out: f64,
    d_min: f64,
    d_max: f64,
    t_s: f64,
    n_max: usize,
    /// Smallest feasible anchor count, `None` when infeasible up to `n_max`.
    n: Option<usize>,
    candidates: Vec<DesignCandidate>,
}

fn design(args: &DesignArgs, out: &Path) -> Result<Vec<String>> {
    if !(args.eps_th > 0.0 && args.eps_th.is_finite()) {
        return Err(usage("--eps-th must be positive and finite"));
    }
    if !(args.p_out > 0.0 && args.p_out < 1.0) {
        return Err(usage("--p-out must lie strictly between 0 and 1"));
    }
    if args.n_max < 3 {
        return Err(usage("--n-max must be at least 3"));
    }
    let base = AnnulusModel::new(args.dmin, args.dmax, 3, args.ts)?;
    let quad = QuadratureSpec::default();
    let mut candidates = Vec::new();
    let mut found = None;
    for n in 3..=args.n_max {
        let model = base.with_anchors(n)?;
        let floor = speb_support_min(&model);
        // the SPEB exceeds its support minimum almost surely
        let (pruned, value) = if floor >= args.eps_th {
            (true, 1.0)
        } else {
            let curve = speb_ccdf_approx(&model, &[args.eps_th], &quad).with_context(|| format!("N = {n}"))?;
            (false, curve.values()[0])
        };
        let meets = value <= args.p_out;
        candidates.push(DesignCandidate {
            n,
            speb_support_min: floor,
            pruned,
            ccdf_approx: value,
            meets_target: meets,
        });
        if meets {
            found = Some(n);
            break;
        }
    }
    let header: Vec<String> = ["n", "speb_support_min", "pruned", "ccdf_approx", "meets_target"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = candidates
        .iter()
        .map(|c| {
            vec![
                c.n.to_string(),
                fmt_f64(c.speb_support_min),
                u8::from(c.pruned).to_string(),
                fmt_f64(c.ccdf_approx),
                u8::from(c.meets_target).to_string(),
            ]
        })
        .collect();
    write_csv(&out.join("design.csv"), &header, &rows)?;
    let report = DesignReport {
        eps_th: args.eps_th,
        p_out: args.p_out,
        d_min: args.dmin,
        d_max: args.dmax,
        t_s: args.ts,
        n_max: args.n_max,
        n: found,
        candidates,
    };
    fs::write(out.join("design.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    match found {
        Some(n) => println!("N = {n}"),
        None => println!("infeasible up to n_max = {}", args.n_max),
    }
    Ok(vec!["design.csv".into(), "design.json".into()])
}

const KS_COLUMNS: [CurveLabel; 4] = [
    CurveLabel::Approx,
    CurveLabel::Gdop,
    CurveLabel::GdopLower,
    CurveLabel::GdopUpper,
];

fn validate(args: &ValidateArgs, out: &Path) -> Result<(Vec<String>, Option<ValidationFailed>)> {
    let range = parse_n_range(&args.n_range)?;
    let sweep = parse_list(&args.dmax_sweep, "--dmax-sweep")?;
    let seed = args.seed.expect("seed resolved before dispatch");
    let quad = QuadratureSpec::default();
    let reports = validation_suite(range, args.dmin, &sweep, args.ts, args.samples, seed, &quad)?;
    let mut header: Vec<String> = ["n", "d_min", "d_max"].iter().map(|s| s.to_string()).collect();
    header.extend(KS_COLUMNS.iter().map(|l| l.to_string()));
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.n_anchors.to_string(), fmt_f64(r.d_min), fmt_f64(r.d_max)];
            row.extend(KS_COLUMNS.iter().map(|l| fmt_f64(r.get(*l).unwrap_or(f64::NAN))));
            row
        })
        .collect();
    write_csv(&out.join("ks.csv"), &header, &rows)?;
    write_plot_script(
        &out.join("plot_ks.gp"),
        "ks.csv",
        "ks.png",
        4,
        header.len(),
        "N",
        "KS distance to Monte Carlo",
        false,
    )?;
    let failures = check_validation(&reports);
    let failure = (!failures.is_empty()).then_some(ValidationFailed(failures));
    Ok((vec!["ks.csv".into(), "plot_ks.gp".into()], failure))
}

fn moments(args: &MomentsArgs, out: &Path) -> Result<Vec<String>> {
    let range = parse_n_range(&args.n_range)?;
    let seed = args.seed.expect("seed resolved before dispatch");
    let quad = QuadratureSpec::default();
    let header: Vec<String> = [
        "n",
        "mean_yn_analytic",
        "mean_yn_empirical",
        "var_yn_empirical",
        "infeasibility_lhs",
        "m_opt",
        "v_opt",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rows = Vec::new();
    for n in range {
        // the geometry factor does not depend on T_s
        let model = AnnulusModel::new(args.dmin, args.dmax, n, 1.0)?;
        let mm = moment_match(&model, &quad).with_context(|| format!("N = {n}"))?;
        let report = empirical_speb_ccdf(&model, args.samples, seed, &[speb_support_min(&model)])?;
        rows.push(vec![
            n.to_string(),
            fmt_f64(mm.mean_yn),
            fmt_f64(report.yn_mean),
            fmt_f64(report.yn_variance),
            fmt_f64(report.infeasibility_lhs),
            fmt_f64(mm.m_opt),
            fmt_f64(mm.v_opt),
        ]);
    }
    write_csv(&out.join("moments.csv"), &header, &rows)?;
    Ok(vec!["moments.csv".into()])
}
