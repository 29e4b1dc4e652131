//! Monte Carlo ground truth: empirical SPEB and GDOP ccdfs, moments of the
//! geometry factor, and Kolmogorov–Smirnov comparison of curves.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{CcdfCurve, CurveLabel};
use crate::error::{Error, Result};
use crate::methods::{MethodContext, MethodRegistry};
use crate::model::{sample_anchor_set_into, sample_angle, sample_range, AnchorSet, AnnulusModel, RngStream};
use crate::quadrature::QuadratureSpec;
use crate::speb::{geometry_factor, speb_support_min, speb_via_fim, w_n, DEGENERACY_THRESHOLD};

/// Draws per parallel chunk; chunk `k` uses random stream `k` of the seed.
pub const CHUNK_SIZE: usize = 65_536;
/// Draws of the pilot run that fixes the default grid.
pub const PILOT_SAMPLES: usize = 10_000;
pub const DEFAULT_GRID_POINTS: usize = 400;
/// Every this many draws the SPEB is recomputed through the Fisher matrix.
pub const CROSS_CHECK_INTERVAL: u64 = 10_000;
pub const CROSS_CHECK_REL_TOL: f64 = 1e-10;

const PILOT_STREAM: u64 = u64::MAX;
/// GDOP runs draw from a disjoint block of streams.
const GDOP_STREAM_BASE: u64 = 1 << 32;

/// Running mean and variance, mergeable across chunks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

/// Bucket counts: entry `k` counts values exceeding exactly `k` grid points.
fn bucket(grid: &[f64], value: f64) -> usize {
    grid.partition_point(|&g| g < value)
}

fn curve_from_buckets(label: CurveLabel, grid: &[f64], buckets: &[u64], total: u64) -> Result<CcdfCurve> {
    let mut values = vec![0.0; grid.len()];
    let mut above = 0u64;
    for k in (0..grid.len()).rev() {
        above += buckets[k + 1];
        values[k] = above as f64 / total as f64;
    }
    CcdfCurve::new(label, grid.to_vec(), values)
}

#[derive(Debug, Clone)]
struct SpebChunk {
    buckets: Vec<u64>,
    yn: Moments,
    b_sums: Vec<f64>,
    degenerate: u64,
    checks: u64,
    mismatches: u64,
}

fn speb_chunk(model: &AnnulusModel, grid: &[f64], seed: u64, chunk: usize, draws: usize) -> SpebChunk {
    let n = model.n_anchors();
    let mut rng = RngStream::new(seed, chunk as u64).generator();
    let mut set = AnchorSet {
        ranges: Vec::with_capacity(n),
        angles: Vec::with_capacity(n),
    };
    let mut b = vec![0.0; n];
    let mut out = SpebChunk {
        buckets: vec![0; grid.len() + 1],
        yn: Moments::default(),
        b_sums: vec![0.0; n],
        degenerate: 0,
        checks: 0,
        mismatches: 0,
    };
    let first = (chunk * CHUNK_SIZE) as u64;
    for i in 0..draws {
        sample_anchor_set_into(model, &mut rng, &mut set);
        let mut x = 0.0;
        for (bk, r) in b.iter_mut().zip(&set.ranges) {
            *bk = 1.0 / (r * r);
            x += *bk;
        }
        for bk in b.iter_mut() {
            *bk /= x;
        }
        let (y, speb) = geometry_factor(&b, &set.angles, x, model.t_s());
        out.yn.push(y);
        for (s, bk) in out.b_sums.iter_mut().zip(&b) {
            *s += bk;
        }
        if speb.is_infinite() {
            out.degenerate += 1;
        }
        out.buckets[bucket(grid, speb)] += 1;
        if (first + i as u64).is_multiple_of(CROSS_CHECK_INTERVAL) {
            out.checks += 1;
            let reference = speb_via_fim(&set, model.t_s());
            let agree = if speb.is_infinite() || reference.is_infinite() {
                speb == reference
            } else {
                ((speb - reference) / reference).abs() < CROSS_CHECK_REL_TOL
            };
            if !agree {
                out.mismatches += 1;
            }
        }
    }
    out
}

/// Outcome of an empirical SPEB run.
///
/// Equality ignores `runtime_ms`; every other field is a deterministic
/// function of the model, sample count, seed and grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub model: AnnulusModel,
    pub sample_count: usize,
    pub seed: u64,
    pub empirical_curve: CcdfCurve,
    pub yn_mean: f64,
    pub yn_variance: f64,
    /// `E[Y]² / Var[Y] - (N² - N)`; negative when unconstrained moment
    /// matching of the surrogate is infeasible.
    pub infeasibility_lhs: f64,
    /// Sample mean of each normalised weight `B_k`.
    pub b_weight_means: Vec<f64>,
    /// Fraction of draws with a collinear geometry and infinite SPEB.
    pub degenerate_rate: f64,
    pub cross_checks: u64,
    pub cross_check_mismatches: u64,
    pub runtime_ms: u64,
}

impl PartialEq for SimulationReport {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model
            && self.sample_count == other.sample_count
            && self.seed == other.seed
            && self.empirical_curve == other.empirical_curve
            && self.yn_mean.to_bits() == other.yn_mean.to_bits()
            && self.yn_variance.to_bits() == other.yn_variance.to_bits()
            && self.infeasibility_lhs.to_bits() == other.infeasibility_lhs.to_bits()
            && self.b_weight_means == other.b_weight_means
            && self.degenerate_rate == other.degenerate_rate
            && self.cross_checks == other.cross_checks
            && self.cross_check_mismatches == other.cross_check_mismatches
    }
}

fn chunk_sizes(samples: usize) -> Vec<usize> {
    let full = samples / CHUNK_SIZE;
    let mut sizes = vec![CHUNK_SIZE; full];
    if !samples.is_multiple_of(CHUNK_SIZE) {
        sizes.push(samples % CHUNK_SIZE);
    }
    sizes
}

/// Log-spaced grid of [`DEFAULT_GRID_POINTS`] SPEB values from half the
/// support minimum to the 99.9th percentile of a pilot run.
pub fn default_u_grid(model: &AnnulusModel, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, PILOT_STREAM).generator();
    let mut set = AnchorSet {
        ranges: Vec::new(),
        angles: Vec::new(),
    };
    let mut spebs: Vec<f64> = (0..PILOT_SAMPLES)
        .map(|_| {
            sample_anchor_set_into(model, &mut rng, &mut set);
            crate::speb::decompose(&set, model.t_s()).speb
        })
        .collect();
    spebs.sort_by(f64::total_cmp);
    let lo = 0.5 * speb_support_min(model);
    let idx = ((0.999 * PILOT_SAMPLES as f64).ceil() as usize).saturating_sub(1);
    let mut hi = spebs[idx];
    if !hi.is_finite() {
        hi = spebs.iter().rev().copied().find(|v| v.is_finite()).unwrap_or(100.0 * lo);
    }
    if !(hi > lo) {
        hi = 100.0 * lo;
    }
    log_grid(lo, hi, DEFAULT_GRID_POINTS)
}

/// `points` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1).max(1) as f64).exp())
        .collect();
    grid[0] = lo;
    if points > 1 {
        grid[points - 1] = hi;
    }
    grid.dedup();
    grid
}

fn check_grid(u_grid: &[f64]) -> Result<()> {
    if u_grid.is_empty() || u_grid.windows(2).any(|w| !(w[1] > w[0])) || u_grid.iter().any(|u| !u.is_finite()) {
        return Err(Error::InvalidArgument(
            "the SPEB grid must be non-empty, finite and strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Empirical SPEB ccdf from `samples` independent anchor sets.
pub fn empirical_speb_ccdf(
    model: &AnnulusModel,
    samples: usize,
    seed: u64,
    u_grid: &[f64],
) -> Result<SimulationReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    check_grid(u_grid)?;
    let start = Instant::now();
    let chunks: Vec<SpebChunk> = chunk_sizes(samples)
        .into_par_iter()
        .enumerate()
        .map(|(k, draws)| speb_chunk(model, u_grid, seed, k, draws))
        .collect();
    let n = model.n_anchors();
    let mut buckets = vec![0u64; u_grid.len() + 1];
    let mut yn = Moments::default();
    let mut b_sums = vec![0.0; n];
    let (mut degenerate, mut checks, mut mismatches) = (0, 0, 0);
    for c in &chunks {
        for (t, v) in buckets.iter_mut().zip(&c.buckets) {
            *t += v;
        }
        yn.merge(&c.yn);
        for (t, v) in b_sums.iter_mut().zip(&c.b_sums) {
            *t += v;
        }
        degenerate += c.degenerate;
        checks += c.checks;
        mismatches += c.mismatches;
    }
    let total = samples as u64;
    let variance = yn.variance();
    let nf = n as f64;
    Ok(SimulationReport {
        model: *model,
        sample_count: samples,
        seed,
        empirical_curve: curve_from_buckets(CurveLabel::Mc, u_grid, &buckets, total)?,
        yn_mean: yn.mean,
        yn_variance: variance,
        infeasibility_lhs: if variance > 0.0 {
            yn.mean * yn.mean / variance - (nf * nf - nf)
        } else {
            f64::NAN
        },
        b_weight_means: b_sums.iter().map(|s| s / samples as f64).collect(),
        degenerate_rate: degenerate as f64 / samples as f64,
        cross_checks: checks,
        cross_check_mismatches: mismatches,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Empirical ccdf of the GDOP: one common range and `N` bearings per draw.
pub fn empirical_gdop_ccdf(model: &AnnulusModel, samples: usize, seed: u64, u_grid: &[f64]) -> Result<CcdfCurve> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    check_grid(u_grid)?;
    let n = model.n_anchors();
    let chunks: Vec<Vec<u64>> = chunk_sizes(samples)
        .into_par_iter()
        .enumerate()
        .map(|(k, draws)| {
            let mut rng = RngStream::new(seed, GDOP_STREAM_BASE + k as u64).generator();
            let mut angles = vec![0.0; n];
            let mut buckets = vec![0u64; u_grid.len() + 1];
            for _ in 0..draws {
                let r = sample_range(model, &mut rng);
                for a in angles.iter_mut() {
                    *a = sample_angle(&mut rng);
                }
                let w = w_n(&angles);
                let g = if w <= DEGENERACY_THRESHOLD {
                    f64::INFINITY
                } else {
                    4.0 * r * r / (model.t_s() * n as f64 * w)
                };
                buckets[bucket(u_grid, g)] += 1;
            }
            buckets
        })
        .collect();
    let mut buckets = vec![0u64; u_grid.len() + 1];
    for c in &chunks {
        for (t, v) in buckets.iter_mut().zip(c) {
            *t += v;
        }
    }
    curve_from_buckets(CurveLabel::Mc, u_grid, &buckets, samples as u64)
}

/// Draws `samples` realizations of `X_N = Σ R_k⁻²` from stream `stream_id`.
pub fn sample_xn(model: &AnnulusModel, samples: usize, seed: u64, stream_id: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, stream_id).generator();
    (0..samples)
        .map(|_| {
            (0..model.n_anchors())
                .map(|_| {
                    let r = sample_range(model, &mut rng);
                    1.0 / (r * r)
                })
                .sum()
        })
        .collect()
}

/// Draws `samples` realizations of `W_N` for `n` uniform bearings.
pub fn sample_wn(n: usize, samples: usize, seed: u64, stream_id: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, stream_id).generator();
    let mut angles = vec![0.0; n];
    (0..samples)
        .map(|_| {
            for a in angles.iter_mut() {
                *a = sample_angle(&mut rng);
            }
            w_n(&angles)
        })
        .collect()
}

/// `sup |a(x) - b(x)|` over the merged abscissae inside the common support.
///
/// Empirical curves are read as step functions and analytic ones linearly.
pub fn ks_statistic(a: &CcdfCurve, b: &CcdfCurve) -> Result<f64> {
    let (a_lo, a_hi) = (a.abscissae()[0], a.abscissae()[a.len() - 1]);
    let (b_lo, b_hi) = (b.abscissae()[0], b.abscissae()[b.len() - 1]);
    let lo = a_lo.max(b_lo);
    let hi = a_hi.min(b_hi);
    if lo > hi {
        return Err(Error::NoOverlap { a_lo, a_hi, b_lo, b_hi });
    }
    let sup = a
        .abscissae()
        .iter()
        .chain(b.abscissae())
        .filter(|x| **x >= lo && **x <= hi)
        .map(|&x| (a.at(x) - b.at(x)).abs())
        .fold(0.0, f64::max);
    Ok(sup)
}

/// KS distances of every method against the Monte Carlo reference for one
/// configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub n_anchors: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub ks: BTreeMap<CurveLabel, f64>,
}

impl KsReport {
    pub fn get(&self, label: CurveLabel) -> Option<f64> {
        self.ks.get(&label).copied()
    }
}

/// Runs every registered method on each `(N, d_max)` configuration and
/// measures its KS distance to the Monte Carlo curve.
#[allow(clippy::too_many_arguments)]
pub fn validation_suite(
    n_range: std::ops::RangeInclusive<usize>,
    d_min: f64,
    d_max_sweep: &[f64],
    t_s: f64,
    samples: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<Vec<KsReport>> {
    if *n_range.start() < 3 || *n_range.end() > 16 || n_range.is_empty() {
        return Err(Error::InvalidArgument("the anchor range must lie within 3..=16".into()));
    }
    if d_max_sweep.is_empty() {
        return Err(Error::InvalidArgument("the d_max sweep is empty".into()));
    }
    let registry = MethodRegistry::standard();
    let mut reports = Vec::new();
    for &d_max in d_max_sweep {
        for n in n_range.clone() {
            let model = AnnulusModel::new(d_min, d_max, n, t_s)?;
            let grid = default_u_grid(&model, seed);
            let ctx = MethodContext {
                model: &model,
                quad,
                samples,
                seed,
            };
            let mut curves = Vec::new();
            for name in ["mc", "approx", "gdop", "bounds"] {
                curves.extend(registry.get(name)?.compute(&ctx, &grid)?);
            }
            let reference = curves
                .iter()
                .find(|c| c.label() == CurveLabel::Mc)
                .expect("the mc method yields an mc curve")
                .clone();
            let mut ks = BTreeMap::new();
            for c in &curves {
                ks.insert(c.label(), ks_statistic(c, &reference)?);
            }
            reports.push(KsReport {
                n_anchors: n,
                d_min,
                d_max,
                ks,
            });
        }
    }
    Ok(reports)
}

/// Checks the qualitative claims a validation run should reproduce and
/// returns a description of each violation.
///
/// The approximation must beat every GDOP-based curve in every configuration,
/// and at fixed `N` its KS distance must not decrease as `d_max` grows.
pub fn check_validation(reports: &[KsReport]) -> Vec<String> {
    let mut failures = Vec::new();
    for r in reports {
        let approx = r.get(CurveLabel::Approx).unwrap_or(f64::NAN);
        for other in [CurveLabel::Gdop, CurveLabel::GdopLower, CurveLabel::GdopUpper] {
            let v = r.get(other).unwrap_or(f64::NAN);
            if !(approx < v) {
                failures.push(format!(
                    "N = {}, d_max = {}: approx KS {approx:.4} is not below {other} KS {v:.4}",
                    r.n_anchors, r.d_max
                ));
            }
        }
    }
    let mut by_n: BTreeMap<usize, Vec<&KsReport>> = BTreeMap::new();
    for r in reports {
        by_n.entry(r.n_anchors).or_default().push(r);
    }
    for (n, mut rows) in by_n {
        rows.sort_by(|a, b| a.d_max.total_cmp(&b.d_max));
        for w in rows.windows(2) {
            let (a, b) = (w[0].get(CurveLabel::Approx), w[1].get(CurveLabel::Approx));
            if let (Some(a_ks), Some(b_ks)) = (a, b) {
                if b_ks < a_ks {
                    failures.push(format!(
                        "N = {n}: approx KS falls from {a_ks:.4} at d_max = {} to {b_ks:.4} at d_max = {}",
                        w[0].d_max, w[1].d_max
                    ));
                }
            }
        }
    }
    failures
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> AnnulusModel {
        AnnulusModel::new(1.0, 10.0, 5, 1.0).unwrap()
    }

    #[test]
    fn moments_merge_matches_serial() {
        let xs: Vec<f64> = (0..1000).map(|k| ((k * 37) % 101) as f64 / 7.0).collect();
        let mut serial = Moments::default();
        xs.iter().for_each(|x| serial.push(*x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|x| a.push(*x));
        xs[313..].iter().for_each(|x| b.push(*x));
        a.merge(&b);
        assert!((a.mean - serial.mean).abs() < 1e-12);
        assert!((a.variance() - serial.variance()).abs() < 1e-10);
    }

    #[test]
    fn single_sample_curve_is_zero_one() {
        let m = model();
        let grid = log_grid(0.1, 100.0, 50);
        let r = empirical_speb_ccdf(&m, 1, 9, &grid).unwrap();
        assert!(r.empirical_curve.values().iter().all(|v| *v == 0.0 || *v == 1.0));
    }

    #[test]
    fn below_support_is_exactly_one() {
        let m = model();
        let grid = default_u_grid(&m, 4);
        let r = empirical_speb_ccdf(&m, 20_000, 4, &grid).unwrap();
        let floor = speb_support_min(&m);
        for (u, v) in grid.iter().zip(r.empirical_curve.values()) {
            if *u < floor {
                assert_eq!(*v, 1.0);
            }
        }
        assert_eq!(r.cross_check_mismatches, 0);
        assert_eq!(r.cross_checks, 2);
    }

    #[test]
    fn ks_extremes_and_overlap() {
        let grid = vec![1.0, 2.0, 3.0];
        let one = CcdfCurve::new(CurveLabel::Approx, grid.clone(), vec![1.0; 3]).unwrap();
        let zero = CcdfCurve::new(CurveLabel::Gdop, grid.clone(), vec![0.0; 3]).unwrap();
        assert_eq!(ks_statistic(&one, &one).unwrap(), 0.0);
        assert_eq!(ks_statistic(&one, &zero).unwrap(), 1.0);
        let far = CcdfCurve::new(CurveLabel::Gdop, vec![5.0, 6.0], vec![1.0, 0.0]).unwrap();
        assert!(matches!(ks_statistic(&one, &far), Err(Error::NoOverlap { .. })));
    }

    #[test]
    fn validation_checks_flag_violations() {
        let mk = |d_max: f64, approx: f64| KsReport {
            n_anchors: 5,
            d_min: 1.0,
            d_max,
            ks: [
                (CurveLabel::Mc, 0.0),
                (CurveLabel::Approx, approx),
                (CurveLabel::Gdop, 0.2),
                (CurveLabel::GdopLower, 0.5),
                (CurveLabel::GdopUpper, 0.7),
            ]
            .into_iter()
            .collect(),
        };
        assert!(check_validation(&[mk(2.0, 0.01), mk(4.0, 0.03)]).is_empty());
        assert_eq!(check_validation(&[mk(2.0, 0.05), mk(4.0, 0.03)]).len(), 1);
        assert_eq!(check_validation(&[mk(2.0, 0.25)]).len(), 1);
    }
}
