//! Squared position error bound of a given anchor geometry, and the GDOP
//! quantities of the equal-range model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AnchorSet, AnnulusModel};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative threshold under which a geometry is treated as collinear.
///
/// Every route below reduces to the same normalised quantity
/// `det(J) / (tr(J)/2)²`, so they agree on which geometries are degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-14;

/// SPEB from the pairwise-sine formula.
///
/// Returns `+∞` when the geometry is collinear.
pub fn speb_exact(anchors: &AnchorSet, t_s: f64) -> f64 {
    let n = anchors.len();
    let a: Vec<f64> = anchors.ranges.iter().map(|r| 1.0 / (r * r)).collect();
    let x: f64 = a.iter().sum();
    let mut pairs = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            let s = (anchors.angles[j] - anchors.angles[k]).sin();
            pairs += a[j] * a[k] * s * s;
        }
    }
    // pairs = x² y / 4 with y the geometry factor of `decompose`
    if pairs <= DEGENERACY_THRESHOLD * 0.25 * x * x {
        return f64::INFINITY;
    }
    x / (t_s * pairs)
}

/// SPEB as the trace of the inverse 2x2 Fisher information matrix.
pub fn speb_via_fim(anchors: &AnchorSet, t_s: f64) -> f64 {
    let (mut j11, mut j22, mut j12) = (0.0, 0.0, 0.0);
    for (r, theta) in anchors.ranges.iter().zip(&anchors.angles) {
        let mu = t_s / (r * r);
        let (s, c) = theta.sin_cos();
        j11 += mu * c * c;
        j22 += mu * s * s;
        j12 += mu * c * s;
    }
    let det = j11 * j22 - j12 * j12;
    let half_trace = 0.5 * (j11 + j22);
    if det <= DEGENERACY_THRESHOLD * half_trace * half_trace {
        return f64::INFINITY;
    }
    (j11 + j22) / det
}

/// Factorisation `SPEB = 4 / (T_s X Y)` of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpebDecomposition {
    /// Sum of inverse squared ranges.
    pub x_n: f64,
    /// Geometry factor in `[0, 1]`.
    pub y_n: f64,
    /// Normalised weights `R_k⁻² / X`, summing to one.
    pub b_weights: Vec<f64>,
    pub speb: f64,
}

/// Splits the SPEB into its range part `X` and geometry part `Y`.
pub fn decompose(anchors: &AnchorSet, t_s: f64) -> SpebDecomposition {
    let b: Vec<f64> = anchors.ranges.iter().map(|r| 1.0 / (r * r)).collect();
    let x: f64 = b.iter().sum();
    let b: Vec<f64> = b.into_iter().map(|a| a / x).collect();
    let (y, speb) = geometry_factor(&b, &anchors.angles, x, t_s);
    SpebDecomposition {
        x_n: x,
        y_n: y,
        b_weights: b,
        speb,
    }
}

/// `(Y, SPEB)` from normalised weights; shared with the Monte Carlo hot loop.
#[inline]
pub(crate) fn geometry_factor(b: &[f64], angles: &[f64], x: f64, t_s: f64) -> (f64, f64) {
    let (mut c, mut s) = (0.0, 0.0);
    for (w, theta) in b.iter().zip(angles) {
        let (s2, c2) = (2.0 * theta).sin_cos();
        c += w * c2;
        s += w * s2;
    }
    let y = 1.0 - c * c - s * s;
    if y <= DEGENERACY_THRESHOLD {
        (y.max(0.0), f64::INFINITY)
    } else {
        (y, 4.0 / (t_s * x * y))
    }
}

/// `W_N = 1 - |Σ e^{2iθ}|² / N²`, the geometry factor with equal weights.
pub fn w_n(angles: &[f64]) -> f64 {
    let n = angles.len() as f64;
    let (mut c, mut s) = (0.0, 0.0);
    for theta in angles {
        let (s2, c2) = (2.0 * theta).sin_cos();
        c += c2;
        s += s2;
    }
    1.0 - (c * c + s * s) / (n * n)
}

/// SPEB of `N` anchors all at distance `radius`: `4 r² / (T_s N W_N)`.
pub fn gdop(model: &AnnulusModel, radius: f64, angles: &[f64]) -> f64 {
    let n = angles.len() as f64;
    let w = w_n(angles);
    if w <= DEGENERACY_THRESHOLD {
        return f64::INFINITY;
    }
    4.0 * radius * radius / (model.t_s() * n * w)
}

/// Smallest attainable SPEB: all anchors at `d_min` in a regular layout.
pub fn speb_support_min(model: &AnnulusModel) -> f64 {
    4.0 * model.d_min() * model.d_min() / (model.n_anchors() as f64 * model.t_s())
}

/// `T_s = 8π² β² d_min² E_s / (N0 c²)` from the effective bandwidth `beta`
/// (Hz), the inner radius (m), the noise density (W/Hz) and the signal energy (J).
pub fn ts_from_system(beta: f64, d_min: f64, noise_psd: f64, signal_energy: f64) -> Result<f64> {
    let args = [beta, d_min, noise_psd, signal_energy];
    if args.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::domain(
            "ts_from_system",
            "bandwidth, d_min, noise density and signal energy must be positive",
        ));
    }
    let scale = 2.0 * std::f64::consts::PI * beta * d_min / SPEED_OF_LIGHT;
    Ok(2.0 * scale * scale * signal_energy / noise_psd)
}

/// Ratio between the width of the inverse-square support and that of the
/// squared-range support, `((d_max/d_min)² - 1) / (2 ln(d_max/d_min))`.
pub fn support_mismatch_ratio(model: &AnnulusModel) -> f64 {
    let q = model.d_max() / model.d_min();
    (q * q - 1.0) / (2.0 * q.ln())
}
