//! Characteristic functions of inverse-squared ranges and their sums, and
//! ccdf recovery by Gil-Pelaez inversion.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::curve::{monotonize, TabulatedCcdf};
use crate::error::{Error, Result};
use crate::model::AnnulusModel;
use crate::quadrature::{gk15_table, integrate_panels, QuadratureSpec};
use crate::specfun::rii_kernel;

/// Most panels a single inversion may lay down before giving up.
const MAX_PANELS: usize = 4_000_000;

/// A characteristic function of a bounded real random variable, together
/// with the facts needed to invert it.
pub trait CharacteristicFunction: Sync {
    fn eval(&self, t: f64) -> Complex64;

    fn mean(&self) -> f64;

    /// Closed interval containing the support.
    fn support(&self) -> (f64, f64);

    /// Non-increasing upper bound on `|φ(t)|` for `t > 0`.
    fn modulus_bound(&self, t: f64) -> f64;
}

/// Characteristic function of `A = R⁻²` for `R` with density `2r/(d_max² - d_min²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiiCf {
    dmin2: f64,
    dmax2: f64,
    span: f64,
    decay: f64,
}

impl RiiCf {
    pub fn new(model: &AnnulusModel) -> Self {
        let dmin2 = model.d_min() * model.d_min();
        let dmax2 = model.d_max() * model.d_max();
        let span = dmax2 - dmin2;
        RiiCf {
            dmin2,
            dmax2,
            span,
            decay: 2.0 * dmax2 * dmax2 / span,
        }
    }
}

impl CharacteristicFunction for RiiCf {
    fn eval(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let s = t.abs();
        let v = (self.dmax2 * rii_kernel(s / self.dmax2) - self.dmin2 * rii_kernel(s / self.dmin2))
            / self.span;
        if t < 0.0 {
            v.conj()
        } else {
            v
        }
    }

    fn mean(&self) -> f64 {
        (self.dmax2 / self.dmin2).ln() / self.span
    }

    fn support(&self) -> (f64, f64) {
        (1.0 / self.dmax2, 1.0 / self.dmin2)
    }

    fn modulus_bound(&self, t: f64) -> f64 {
        // Integrating by parts once: |φ(t)| <= (f(lo) + f(hi) + total variation) / t
        // with f the density a⁻²/span, i.e. at most 2 d_max⁴ / (span t).
        (self.decay / t).min(1.0)
    }
}

/// Characteristic function of `X_N`, the sum of `N` iid copies of `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRiiCf {
    rii: RiiCf,
    n: usize,
}

impl AggregateRiiCf {
    pub fn new(model: &AnnulusModel) -> Self {
        AggregateRiiCf {
            rii: RiiCf::new(model),
            n: model.n_anchors(),
        }
    }
}

impl CharacteristicFunction for AggregateRiiCf {
    fn eval(&self, t: f64) -> Complex64 {
        self.rii.eval(t).powi(self.n as i32)
    }

    fn mean(&self) -> f64 {
        self.n as f64 * self.rii.mean()
    }

    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.rii.support();
        (self.n as f64 * lo, self.n as f64 * hi)
    }

    fn modulus_bound(&self, t: f64) -> f64 {
        self.rii.modulus_bound(t).powi(self.n as i32)
    }
}

/// Characteristic function of `T(u) = (1-u) A_1 - u (A_2 + ... + A_N)`,
/// whose probability of being positive is `P(B > u)` for the normalised weight `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryCf {
    rii: RiiCf,
    n: usize,
    u: f64,
}

impl AuxiliaryCf {
    pub fn new(model: &AnnulusModel, u: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain("phi_t_aux", format!("u must lie in [0, 1], got {u}")));
        }
        Ok(AuxiliaryCf {
            rii: RiiCf::new(model),
            n: model.n_anchors(),
            u,
        })
    }
}

impl CharacteristicFunction for AuxiliaryCf {
    fn eval(&self, t: f64) -> Complex64 {
        let first = self.rii.eval((1.0 - self.u) * t);
        let rest = self.rii.eval(-self.u * t).powi(self.n as i32 - 1);
        first * rest
    }

    fn mean(&self) -> f64 {
        self.rii.mean() * (1.0 - self.u * self.n as f64)
    }

    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.rii.support();
        let others = (self.n - 1) as f64 * self.u;
        ((1.0 - self.u) * lo - others * hi, (1.0 - self.u) * hi - others * lo)
    }

    fn modulus_bound(&self, t: f64) -> f64 {
        let first = if self.u < 1.0 {
            self.rii.modulus_bound((1.0 - self.u) * t)
        } else {
            1.0
        };
        let rest = if self.u > 0.0 {
            self.rii.modulus_bound(self.u * t).powi(self.n as i32 - 1)
        } else {
            1.0
        };
        first * rest
    }
}

/// `φ_A(t)` of a single inverse-squared range.
pub fn phi_rii(model: &AnnulusModel, t: f64) -> Complex64 {
    RiiCf::new(model).eval(t)
}

/// `φ_X(t) = φ_A(t)^N`.
pub fn phi_xn(model: &AnnulusModel, t: f64) -> Complex64 {
    AggregateRiiCf::new(model).eval(t)
}

/// `φ_A((1-u)t) φ_A(-ut)^{N-1}`.
pub fn phi_t_aux(model: &AnnulusModel, u: f64, t: f64) -> Result<Complex64> {
    Ok(AuxiliaryCf::new(model, u)?.eval(t))
}

/// Smallest `t` with `modulus_bound(t) / t < floor`.
pub fn truncation_point<C: CharacteristicFunction + ?Sized>(cf: &C, floor: f64) -> f64 {
    let small = |t: f64| cf.modulus_bound(t) / t < floor;
    let mut hi = 1.0;
    while !small(hi) {
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    let mut lo = hi / 2.0;
    if small(lo) {
        // already below the floor close to the origin
        while small(lo) && lo > 1e-300 {
            lo /= 2.0;
        }
        hi = 2.0 * lo;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if small(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Integration layout shared by the scalar and tabulated inversions.
struct Layout {
    /// End of the interval near the origin handled by the series.
    eps: f64,
    /// Truncation point of the tail.
    t_max: f64,
    /// Panel width: half a period of the fastest oscillation.
    width: f64,
    panels: usize,
}

fn layout<C: CharacteristicFunction + ?Sized>(
    cf: &C,
    omega: f64,
    quad: &QuadratureSpec,
    what: &str,
) -> Result<Layout> {
    let (lo, hi) = cf.support();
    let eps = quad.small_t_cutoff / (hi - lo);
    let t_max = truncation_point(cf, quad.t_truncation_floor).max(eps);
    let width = PI / omega.max(f64::MIN_POSITIVE);
    let span = t_max - eps;
    let panels = (span / width).ceil().max(1.0);
    if panels > MAX_PANELS as f64 {
        return Err(Error::NonConvergence {
            integral: what.to_string(),
            error: f64::INFINITY,
            subdivisions: 0,
        });
    }
    let panels = panels as usize;
    Ok(Layout {
        eps,
        t_max,
        width: span / panels as f64,
        panels,
    })
}

/// `P(X > x)` by Gil-Pelaez inversion of the characteristic function of `X`.
///
/// On `[0, ε]` the integrand `Im{e^{-itx} φ(t)}/t` is replaced by its limit
/// `μ - x`; the next term of its expansion is `O(t²)` and contributes at most
/// `ε³ w³ / 18` for support width `w`, far below any usable tolerance.
pub fn gil_pelaez_ccdf<C: CharacteristicFunction + ?Sized>(
    cf: &C,
    x: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let (lo, hi) = cf.support();
    if x <= lo {
        return Ok(1.0);
    }
    if x >= hi {
        return Ok(0.0);
    }
    let omega = (x - lo).max(hi - x);
    let name = format!("Gil-Pelaez inversion at x = {x}");
    let lay = layout(cf, omega, quad, &name)?;
    let edges: Vec<f64> = (0..=lay.panels)
        .map(|k| {
            if k == lay.panels {
                lay.t_max
            } else {
                lay.eps + k as f64 * lay.width
            }
        })
        .collect();
    let integrand = |t: f64| {
        let (s, c) = (t * x).sin_cos();
        let v = cf.eval(t);
        (c * v.im - s * v.re) / t
    };
    let main = integrate_panels(
        integrand,
        &edges,
        PI * quad.abs_tol,
        quad.rel_tol,
        quad.max_subdivisions,
        &name,
    )?;
    let origin = (cf.mean() - x) * lay.eps;
    Ok((0.5 + (origin + main.value) / PI).clamp(0.0, 1.0))
}

/// Tabulates `P(X > x)` at `points` equally spaced abscissae from `x_lo` to `x_hi`.
///
/// All abscissae share one set of quadrature nodes, so `φ` is evaluated once
/// per node; `e^{-itx}` is advanced along the grid by complex rotation. Panels
/// are bisected until every abscissa meets the tolerance. Values agree with
/// [`gil_pelaez_ccdf`] to within the quadrature tolerance.
pub fn tabulate_ccdf<C: CharacteristicFunction + ?Sized>(
    cf: &C,
    x_lo: f64,
    x_hi: f64,
    points: usize,
    quad: &QuadratureSpec,
) -> Result<TabulatedCcdf> {
    if points < 2 || !(x_hi > x_lo) {
        return Err(Error::InvalidArgument(
            "tabulation needs at least two points on a non-empty interval".into(),
        ));
    }
    let (lo, hi) = cf.support();
    let step = (x_hi - x_lo) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points)
        .map(|k| if k == points - 1 { x_hi } else { x_lo + k as f64 * step })
        .collect();
    let omega = [x_lo - lo, hi - x_lo, x_hi - lo, hi - x_hi]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let what = "tabulated Gil-Pelaez inversion";
    let lay = layout(cf, omega, quad, what)?;
    let total_len = lay.t_max - lay.eps;

    let rule = gk15_table();
    let mut total = vec![0.0; points];
    let mut kacc = vec![0.0; points];
    let mut gacc = vec![0.0; points];
    let mut budget = quad.max_subdivisions;
    let mut stack: Vec<(f64, f64)> = Vec::new();
    let tol = PI * quad.abs_tol;

    for p in (0..lay.panels).rev() {
        let a = lay.eps + p as f64 * lay.width;
        let b = if p + 1 == lay.panels { lay.t_max } else { a + lay.width };
        stack.push((a, b));
    }
    while let Some((a, b)) = stack.pop() {
        kacc.iter_mut().for_each(|v| *v = 0.0);
        gacc.iter_mut().for_each(|v| *v = 0.0);
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for &(offset, wk, wg) in &rule {
            let t = center + half * offset;
            let phi = cf.eval(t);
            accumulate_node(t, phi, wk / t, wg / t, &xs, x_lo, step, &mut kacc, &mut gacc);
        }
        let share = tol * (b - a) / total_len;
        let worst = kacc
            .iter()
            .zip(&gacc)
            .map(|(k, g)| (half * (k - g)).abs())
            .fold(0.0, f64::max);
        if worst > share {
            if budget == 0 {
                return Err(Error::NonConvergence {
                    integral: what.to_string(),
                    error: worst,
                    subdivisions: quad.max_subdivisions,
                });
            }
            budget -= 1;
            stack.push((center, b));
            stack.push((a, center));
            continue;
        }
        for (t, k) in total.iter_mut().zip(&kacc) {
            *t += half * k;
        }
    }

    let mut values: Vec<f64> = xs
        .iter()
        .zip(&total)
        .map(|(&x, &main)| {
            if x <= lo {
                1.0
            } else if x >= hi {
                0.0
            } else {
                0.5 + ((cf.mean() - x) * lay.eps + main) / PI
            }
        })
        .collect();
    monotonize(&mut values, what)?;
    TabulatedCcdf::new(xs, values)
}

/// Adds one node's contribution `w Im{e^{-itx} φ(t)}` at every grid abscissa.
#[allow(clippy::too_many_arguments)]
#[inline]
fn accumulate_node(
    t: f64,
    phi: Complex64,
    wk: f64,
    wg: f64,
    xs: &[f64],
    x0: f64,
    step: f64,
    kacc: &mut [f64],
    gacc: &mut [f64],
) {
    const RESEED: usize = 128;
    let (sd, cd) = (t * step).sin_cos();
    let rot = Complex64::new(cd, -sd);
    let mut z = Complex64::new(0.0, 0.0);
    for (k, x) in xs.iter().enumerate() {
        if k % RESEED == 0 {
            let (s, c) = (t * if k == 0 { x0 } else { *x }).sin_cos();
            z = Complex64::new(c, -s);
        }
        let im = z.re * phi.im + z.im * phi.re;
        kacc[k] += wk * im;
        if wg != 0.0 {
            gacc[k] += wg * im;
        }
        z *= rot;
    }
}

/// `E[h(X)]` as a Stieltjes sum of `h` at cell midpoints against the
/// probability mass of each cell of the tabulated ccdf.
///
/// The same sum over every other grid point serves as the refinement check:
/// if the two differ by `tol` or more the table is too coarse for `h`.
pub fn expectation_over_ccdf<H: Fn(f64) -> f64>(h: H, ccdf: &TabulatedCcdf, tol: f64) -> Result<f64> {
    let xs = ccdf.abscissae();
    let vs = ccdf.values();
    if xs.len() < 3 {
        return Err(Error::InvalidArgument("the ccdf table needs at least 3 points".into()));
    }
    if vs[0] < 1.0 - 1e-4 || vs[vs.len() - 1] > 1e-4 {
        return Err(Error::InvalidArgument(
            "the ccdf must be tabulated over its full support".into(),
        ));
    }
    let fine = stieltjes(&h, xs, vs, 1);
    let coarse = stieltjes(&h, xs, vs, 2);
    let difference = (fine - coarse).abs();
    if difference >= tol {
        return Err(Error::ToleranceNotMet {
            what: "expectation over a tabulated ccdf".into(),
            difference,
            tolerance: tol,
        });
    }
    Ok(fine)
}

fn stieltjes<H: Fn(f64) -> f64>(h: &H, xs: &[f64], vs: &[f64], stride: usize) -> f64 {
    let last = xs.len() - 1;
    let mut idx: Vec<usize> = (0..=last).step_by(stride).collect();
    if *idx.last().unwrap() != last {
        idx.push(last);
    }
    let mut sum = (1.0 - vs[0]) * h(xs[0]);
    for w in idx.windows(2) {
        let (i, j) = (w[0], w[1]);
        let mass = vs[i] - vs[j];
        if mass != 0.0 {
            sum += h(0.5 * (xs[i] + xs[j])) * mass;
        }
    }
    sum + vs[last] * h(xs[last])
}
