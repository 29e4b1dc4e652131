//! Ccdf of the equal-weight geometry factor `W_N`.
//!
//! `W_N = 1 - |S|²/N²` where `S` is the sum of `N` unit vectors at the doubled
//! bearings, so `P(W_N > u) = P(|S| < r)` with `r = N √(1-u)`, given by
//! `r ∫_0^∞ J1(r y) J0(y)^N dy`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::quadrature::{gk15_table, QuadratureSpec};
use crate::specfun::bessel_j0_j1;

/// Accuracy target for the truncated tail of the Bessel integral.
const TAIL_TOLERANCE: f64 = 1e-6;
const MIN_TRUNCATION: f64 = 200.0;
/// The tail of the `N = 3` integrand decays only like `y^{-2}`; the cap keeps
/// table construction to a few seconds at the cost of ~1e-5 accuracy next to `u = 0`.
const MAX_TRUNCATION: f64 = 4000.0;
/// Interpolation nodes across the full range `0 <= r <= N`.
const TABLE_NODES: usize = 1025;

/// Shared quadrature nodes for the Bessel integral of one `N`.
#[derive(Debug, Clone)]
struct BesselIntegral {
    nodes: Vec<f64>,
    /// Kronrod and Gauss weights, premultiplied by `J0(y)^N`, per node.
    kronrod: Vec<f64>,
    gauss: Vec<f64>,
}

impl BesselIntegral {
    fn new(n: usize) -> Self {
        let nf = n as f64;
        // |J0(y)| <= sqrt(2/(πy)) and |J1(ry)| <= sqrt(2/(πry)) bound the tail
        // for r <= N by sqrt(N) (2/π)^((N+1)/2) (2/(N-1)) Y^(-(N-1)/2).
        let c = nf.sqrt() * (2.0 / PI).powf(0.5 * (nf + 1.0)) * 2.0 / (nf - 1.0);
        let y_max = (c / TAIL_TOLERANCE)
            .powf(2.0 / (nf - 1.0))
            .clamp(MIN_TRUNCATION, MAX_TRUNCATION);
        // one full period of the fastest component, frequency r + N <= 2N
        let width = PI / nf;
        let panels = (y_max / width).ceil() as usize;
        let rule = gk15_table();
        let mut nodes = Vec::with_capacity(15 * panels);
        let mut kronrod = Vec::with_capacity(15 * panels);
        let mut gauss = Vec::with_capacity(15 * panels);
        for p in 0..panels {
            let center = (p as f64 + 0.5) * width;
            let half = 0.5 * width;
            for &(offset, wk, wg) in &rule {
                let y = center + half * offset;
                let j0n = bessel_j0_j1(y).0.powi(n as i32);
                nodes.push(y);
                kronrod.push(half * wk * j0n);
                gauss.push(half * wg * j0n);
            }
        }
        BesselIntegral {
            nodes,
            kronrod,
            gauss,
        }
    }

    /// `(P(|S| < r), error estimate)` for `0 < r`.
    fn eval(&self, r: f64) -> (f64, f64) {
        let mut total = 0.0;
        let mut error = 0.0;
        for ((ys, ks), gs) in self
            .nodes
            .chunks_exact(15)
            .zip(self.kronrod.chunks_exact(15))
            .zip(self.gauss.chunks_exact(15))
        {
            let (mut k, mut g) = (0.0, 0.0);
            for j in 0..15 {
                let j1 = bessel_j0_j1(r * ys[j]).1;
                k += ks[j] * j1;
                g += gs[j] * j1;
            }
            total += k;
            error += (k - g).abs();
        }
        (r * total, r * error)
    }
}

/// Monotone cubic (Fritsch–Carlson) interpolant.
#[derive(Debug, Clone)]
struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slopes[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        slopes[0] = end_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        slopes[n - 1] = end_slope(
            h[n - 2],
            if n > 2 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n > 2 { delta[n - 3] } else { delta[n - 2] },
        );
        Pchip { xs, ys, slopes }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = self.xs.partition_point(|&a| a <= x).clamp(1, n - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Interpolation table of `P(W_N > u)` for one `N`.
#[derive(Debug, Clone)]
pub struct WnTable {
    n: usize,
    integral: BesselIntegral,
    spline: Pchip,
}

impl WnTable {
    pub fn build(n: usize, quad: &QuadratureSpec) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("W_N needs N >= 3, got {n}")));
        }
        let integral = BesselIntegral::new(n);
        let nf = n as f64;
        // the density of |S| is singular at r = |N - 2k|; keep nodes off those seams
        let mut breaks: Vec<f64> = (0..=n / 2).map(|k| (nf - 2.0 * k as f64).abs()).collect();
        breaks.push(0.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut rs: Vec<f64> = Vec::new();
        for seg in breaks.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let m = ((TABLE_NODES as f64 * (b - a) / nf).round() as usize).max(9);
            for j in 0..m {
                if j == 0 && !rs.is_empty() {
                    continue;
                }
                let c = (PI * j as f64 / (m - 1) as f64).cos();
                rs.push(0.5 * (a + b) - 0.5 * (b - a) * c);
            }
        }
        let mut values = Vec::with_capacity(rs.len());
        for &r in &rs {
            if r == 0.0 {
                values.push(0.0);
            } else if r == nf {
                values.push(1.0);
            } else {
                let (v, err) = integral.eval(r);
                if err > quad.abs_tol {
                    return Err(Error::NonConvergence {
                        integral: format!("W_{n} Bessel integral at r = {r}"),
                        error: err,
                        subdivisions: 0,
                    });
                }
                values.push(v.clamp(0.0, 1.0));
            }
        }
        Ok(WnTable {
            n,
            integral,
            spline: Pchip::new(rs, values),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Interpolated `P(W_N > u)`.
    pub fn ccdf(&self, u: f64) -> f64 {
        if u.is_nan() {
            return f64::NAN;
        }
        if u <= 0.0 {
            return 1.0;
        }
        if u >= 1.0 {
            return 0.0;
        }
        let r = self.n as f64 * (1.0 - u).sqrt();
        self.spline.eval(r).clamp(0.0, 1.0)
    }

    /// `P(W_N > u)` by direct quadrature, bypassing the interpolant.
    pub fn ccdf_direct(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 1.0;
        }
        if u >= 1.0 {
            return 0.0;
        }
        let r = self.n as f64 * (1.0 - u).sqrt();
        self.integral.eval(r).0.clamp(0.0, 1.0)
    }
}

type TableCache = Mutex<HashMap<(usize, u64), Arc<WnTable>>>;

fn cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The cached table for `(n, quad.abs_tol)`, built on first use.
///
/// Construction runs on the calling thread while the cache is locked, so it
/// must not be triggered from inside a parallel region that also needs it;
/// callers fetch the table before fanning out.
pub fn wn_table(n: usize, quad: &QuadratureSpec) -> Result<Arc<WnTable>> {
    let key = (n, quad.abs_tol.to_bits());
    let mut map = cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(t) = map.get(&key) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(WnTable::build(n, quad)?);
    map.insert(key, Arc::clone(&table));
    Ok(table)
}

/// `P(W_N > u)`: 1 for `u < 0`, 0 for `u > 1`, the Bessel integral between.
pub fn wn_ccdf(n: usize, u: f64, quad: &QuadratureSpec) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("W_N needs N >= 3, got {n}")));
    }
    if u <= 0.0 {
        return Ok(1.0);
    }
    if u >= 1.0 {
        return Ok(0.0);
    }
    Ok(wn_table(n, quad)?.ccdf(u))
}
