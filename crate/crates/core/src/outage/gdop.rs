//! GDOP-based SPEB ccdfs: all anchors placed at one common random range.

use rayon::prelude::*;

use crate::charfun::expectation_over_ccdf;
use crate::curve::{monotonize, CcdfCurve, CurveLabel, TabulatedCcdf};
use crate::error::{Error, Result};
use crate::model::{ccdf_farthest, ccdf_nearest, AnnulusModel};
use crate::outage::approx::check_grid;
use crate::outage::wn::{wn_table, WnTable};
use crate::quadrature::{integrate_panels, QuadratureSpec};

/// Tolerance of the Stieltjes sums against the order-statistic ccdfs.
pub const BOUND_TOLERANCE: f64 = 1e-6;
const BOUND_GRID_POINTS: usize = 1024;
const MAX_BOUND_GRID_POINTS: usize = 1 << 20;

/// `u` values at which `P(W_N > u)` is not smooth.
fn wn_seams(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (1..=n / 2)
        .map(|k| {
            let r = (nf - 2.0 * k as f64) / nf;
            1.0 - r * r
        })
        .filter(|w| *w > 0.0 && *w < 1.0)
        .collect()
}

/// `P(G > u)` with the common range `R` drawn from the single-range law.
///
/// With `s = R²` uniform on `[d_min², d_max²]` the expectation is an integral
/// of `P(W_N > c s)` over `s`, split at the seams of the `W_N` ccdf.
pub fn gdop_ccdf(model: &AnnulusModel, u_grid: &[f64], quad: &QuadratureSpec) -> Result<CcdfCurve> {
    check_grid(u_grid)?;
    quad.validate()?;
    let wn = wn_table(model.n_anchors(), quad)?;
    let seams = wn_seams(model.n_anchors());
    let s_lo = model.d_min() * model.d_min();
    let span = model.area_span();
    let mut values = u_grid
        .par_iter()
        .map(|&u| {
            let c = 4.0 / (model.t_s() * model.n_anchors() as f64 * u);
            let s_hi = (s_lo + span).min(1.0 / c);
            if s_hi <= s_lo {
                return Ok(1.0);
            }
            let mut edges = vec![s_lo];
            edges.extend(seams.iter().map(|w| w / c).filter(|s| *s > s_lo && *s < s_hi));
            edges.push(s_hi);
            let integral = integrate_panels(
                |s| wn.ccdf(c * s),
                &edges,
                quad.abs_tol * span,
                quad.rel_tol,
                quad.max_subdivisions,
                "GDOP ccdf range average",
            )?;
            Ok(1.0 - integral.value / span)
        })
        .collect::<Result<Vec<f64>>>()?;
    monotonize(&mut values, "GDOP ccdf")?;
    CcdfCurve::new(CurveLabel::Gdop, u_grid.to_vec(), values)
}

/// GDOP ccdfs with the common range set to the nearest (lower curve) and the
/// farthest (upper curve) of the `N` anchor ranges.
pub fn gdop_bound_ccdfs(
    model: &AnnulusModel,
    u_grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<(CcdfCurve, CcdfCurve)> {
    check_grid(u_grid)?;
    quad.validate()?;
    let wn = wn_table(model.n_anchors(), quad)?;
    let lower = bound_curve(model, u_grid, &wn, |r| ccdf_nearest(model, r), CurveLabel::GdopLower)?;
    let upper = bound_curve(model, u_grid, &wn, |r| ccdf_farthest(model, r), CurveLabel::GdopUpper)?;
    Ok((lower, upper))
}

fn bound_curve<F: Fn(f64) -> f64 + Sync>(
    model: &AnnulusModel,
    u_grid: &[f64],
    wn: &WnTable,
    range_ccdf: F,
    label: CurveLabel,
) -> Result<CcdfCurve> {
    let nf = model.n_anchors() as f64;
    let mut points = BOUND_GRID_POINTS;
    let mut values = loop {
        let table = range_table(model, points, &range_ccdf)?;
        let attempt = u_grid
            .par_iter()
            .map(|&u| {
                let c = 4.0 / (model.t_s() * nf * u);
                let e = expectation_over_ccdf(|r| wn.ccdf(c * r * r), &table, BOUND_TOLERANCE)?;
                Ok(1.0 - e)
            })
            .collect::<Result<Vec<f64>>>();
        match attempt {
            Ok(v) => break v,
            Err(Error::ToleranceNotMet { .. }) if points < MAX_BOUND_GRID_POINTS => points *= 2,
            Err(e) => return Err(e),
        }
    };
    monotonize(&mut values, label.as_str())?;
    CcdfCurve::new(label, u_grid.to_vec(), values)
}

fn range_table<F: Fn(f64) -> f64>(model: &AnnulusModel, points: usize, ccdf: &F) -> Result<TabulatedCcdf> {
    let (lo, hi) = (model.d_min(), model.d_max());
    let step = (hi - lo) / points as f64;
    let xs: Vec<f64> = (0..=points)
        .map(|k| if k == points { hi } else { lo + k as f64 * step })
        .collect();
    let vs: Vec<f64> = xs.iter().map(|&r| ccdf(r).clamp(0.0, 1.0)).collect();
    TabulatedCcdf::new(xs, vs)
}
