//! Slow, independent reference implementations used as test oracles.
//!
//! Nothing here shares code with the library: quadrature nodes are computed
//! by Newton iteration on Legendre polynomials, and special functions come
//! from their integral definitions.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

thread_local! {
    static GL20: (Vec<f64>, Vec<f64>) = gauss_legendre(20);
}

/// Composite 20-point Gauss–Legendre over `panels` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    GL20.with(|(xs, ws)| {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let c = a + (p as f64 + 0.5) * h;
            let mut s = 0.0;
            for (x, w) in xs.iter().zip(ws) {
                s += w * f(c + 0.5 * h * x);
            }
            total += 0.5 * h * s;
        }
        total
    })
}

/// Complex version of [`integrate`] over explicit panel edges.
pub fn integrate_complex_edges<F: Fn(f64) -> Complex64>(f: F, edges: &[f64]) -> Complex64 {
    GL20.with(|(xs, ws)| {
        let mut total = Complex64::new(0.0, 0.0);
        for e in edges.windows(2) {
            let (a, b) = (e[0], e[1]);
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            let mut s = Complex64::new(0.0, 0.0);
            for (x, w) in xs.iter().zip(ws) {
                s += f(c + h * x) * *w;
            }
            total += s * h;
        }
        total
    })
}

fn panels_for(x: f64) -> usize {
    (x.abs().ceil() as usize).max(4)
}

/// `Si(x) = ∫_0^x sin t / t dt`.
pub fn si(x: f64) -> f64 {
    let sinc = |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t };
    integrate(sinc, 0.0, x, panels_for(x))
}

/// `Ci(x) = γ + ln x + ∫_0^x (cos t - 1) / t dt` for `x > 0`.
pub fn ci(x: f64) -> f64 {
    let g = |t: f64| if t == 0.0 { 0.0 } else { (t.cos() - 1.0) / t };
    EULER_GAMMA + x.ln() + integrate(g, 0.0, x, panels_for(x))
}

/// `J0(x) = (1/π) ∫_0^π cos(x sin θ) dθ`.
pub fn j0(x: f64) -> f64 {
    integrate(|th| (x * th.sin()).cos(), 0.0, PI, panels_for(x)) / PI
}

/// `J1(x) = (1/π) ∫_0^π cos(θ - x sin θ) dθ`.
pub fn j1(x: f64) -> f64 {
    integrate(|th| (th - x * th.sin()).cos(), 0.0, PI, panels_for(x)) / PI
}

/// `E[e^{itA}]` for `A = R⁻²`, `R²` uniform on `[d_min², d_max²]`, by direct
/// quadrature of the density `1 / ((d_max² - d_min²) a²)`.
pub fn phi_rii_direct(d_min: f64, d_max: f64, t: f64) -> Complex64 {
    let (lo, hi) = (1.0 / (d_max * d_max), 1.0 / (d_min * d_min));
    let span = d_max * d_max - d_min * d_min;
    // geometric panels for the a⁻² profile, refined to resolve the oscillation
    let mut edges = vec![lo];
    let ratio: f64 = 1.05;
    let max_width = if t.abs() > 0.0 { 1.0 / t.abs() } else { f64::INFINITY };
    let mut a = lo;
    while a < hi {
        let next = (a * ratio).min(hi);
        let pieces = ((next - a) / max_width).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            edges.push(a + (next - a) * k as f64 / pieces as f64);
        }
        a = next;
    }
    integrate_complex_edges(|a| Complex64::from_polar(1.0 / (span * a * a), t * a), &edges)
}

/// Deterministic oracle generator, independent of the library's streams.
pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// A range drawn uniformly over the annulus area.
pub fn draw_range<R: Rng>(rng: &mut R, d_min: f64, d_max: f64) -> f64 {
    let u: f64 = rng.random();
    (d_min * d_min + u * (d_max * d_max - d_min * d_min)).sqrt()
}

/// Samples of `X_N = Σ R_k⁻²`.
pub fn sample_xn(n: usize, d_min: f64, d_max: f64, samples: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..samples)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let d = draw_range(&mut r, d_min, d_max);
                    1.0 / (d * d)
                })
                .sum()
        })
        .collect()
}

/// Samples of `W_N = 1 - |Σ e^{2iθ}|² / N²` with uniform bearings.
pub fn sample_wn(n: usize, samples: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..samples)
        .map(|_| {
            let (mut c, mut s) = (0.0, 0.0);
            for _ in 0..n {
                let th: f64 = r.random::<f64>() * 2.0 * PI;
                c += (2.0 * th).cos();
                s += (2.0 * th).sin();
            }
            1.0 - (c * c + s * s) / (n * n) as f64
        })
        .collect()
}

/// Samples of `(Y_N, B_k, X_N)` from scratch.
pub fn sample_yn(n: usize, d_min: f64, d_max: f64, samples: usize, seed: u64) -> Vec<(f64, Vec<f64>, f64)> {
    let mut r = rng(seed);
    (0..samples)
        .map(|_| {
            let a: Vec<f64> = (0..n)
                .map(|_| {
                    let d = draw_range(&mut r, d_min, d_max);
                    1.0 / (d * d)
                })
                .collect();
            let x: f64 = a.iter().sum();
            let b: Vec<f64> = a.iter().map(|v| v / x).collect();
            let (mut c, mut s) = (0.0, 0.0);
            for bk in &b {
                let th: f64 = r.random::<f64>() * 2.0 * PI;
                c += bk * (2.0 * th).cos();
                s += bk * (2.0 * th).sin();
            }
            (1.0 - c * c - s * s, b, x)
        })
        .collect()
}

/// Empirical `P(X > x)` from sorted samples.
pub fn empirical_ccdf(sorted: &[f64], x: f64) -> f64 {
    let below = sorted.partition_point(|v| *v <= x);
    (sorted.len() - below) as f64 / sorted.len() as f64
}

/// Empirical characteristic function.
pub fn empirical_cf(samples: &[f64], t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for x in samples {
        acc += Complex64::from_polar(1.0, t * x);
    }
    acc / samples.len() as f64
}

/// Sorted copy.
pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// `points` log-spaced values in `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (points - 1) as f64).exp())
        .collect()
}
