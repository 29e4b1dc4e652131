//! Mean of the geometry factor `Y_N` and the constrained moment match.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::charfun::{gil_pelaez_ccdf, AuxiliaryCf};
use crate::error::Result;
use crate::model::AnnulusModel;
use crate::quadrature::{integrate, QuadratureSpec};

/// Relative tolerance of the outer integral over the weight distribution.
const OUTER_REL_TOL: f64 = 1e-6;

/// Surrogate parameters `(m, v)` of `V_N = v (1 - m² |Σ e^{2iθ}|²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentMatch {
    pub mean_yn: f64,
    pub m_opt: f64,
    pub v_opt: f64,
}

/// Support `[ρ_min, ρ_max]` of a normalised weight `B_k = R_k⁻² / X_N`.
pub fn rho_bounds(model: &AnnulusModel) -> (f64, f64) {
    let (lo, hi) = model.rii_support();
    let others = (model.n_anchors() - 1) as f64;
    (lo / (lo + others * hi), hi / (hi + others * lo))
}

/// `P(B_k > u)`, the probability that the auxiliary variable
/// `(1-u) A_1 - u Σ_{j>=2} A_j` is positive.
pub fn weight_ccdf(model: &AnnulusModel, u: f64, quad: &QuadratureSpec) -> Result<f64> {
    let (rho_min, rho_max) = rho_bounds(model);
    if u <= rho_min {
        return Ok(1.0);
    }
    if u >= rho_max {
        return Ok(0.0);
    }
    gil_pelaez_ccdf(&AuxiliaryCf::new(model, u)?, 0.0, quad)
}

type MeanCache = Mutex<HashMap<[u64; 4], f64>>;

fn cache() -> &'static MeanCache {
    static CACHE: OnceLock<MeanCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `E[Y_N] = 1 - N E[B²]` with `E[B²] = ρ_min² + 2 ∫_{ρ_min}^{ρ_max} u P(B > u) du`.
///
/// The cross terms of `|Σ B_k e^{2iθ_k}|²` vanish in expectation because the
/// bearings are independent and uniform. Results are memoised per model
/// geometry and tolerance.
pub fn mean_yn(model: &AnnulusModel, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    let key = [
        model.d_min().to_bits(),
        model.d_max().to_bits(),
        model.n_anchors() as u64,
        quad.abs_tol.to_bits(),
    ];
    if let Some(v) = cache().lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(*v);
    }
    let value = compute_mean_yn(model, quad)?;
    cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, value);
    Ok(value)
}

fn compute_mean_yn(model: &AnnulusModel, quad: &QuadratureSpec) -> Result<f64> {
    let n = model.n_anchors() as f64;
    let (rho_min, rho_max) = rho_bounds(model);
    let bracket = 0.5 * (rho_max * rho_max - rho_min * rho_min);
    if n * bracket <= quad.abs_tol {
        // nearly equal ranges: E[B²] is pinned between ρ_min² and ρ_max²
        return Ok(1.0 - n * (rho_min * rho_min + bracket));
    }
    let mut failure = None;
    let integral = integrate(
        |u| match weight_ccdf(model, u, quad) {
            Ok(p) => u * p,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        rho_min,
        rho_max,
        quad.abs_tol,
        OUTER_REL_TOL,
        quad.max_subdivisions,
        "outer integral of the mean geometry factor",
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let second_moment = (rho_min * rho_min + 2.0 * integral.value).clamp(rho_min * rho_min, rho_max * rho_max);
    Ok(1.0 - n * second_moment)
}

/// `m_opt = 1/N` and `v_opt = E[Y_N] N / (N - 1)`.
pub fn moment_match(model: &AnnulusModel, quad: &QuadratureSpec) -> Result<MomentMatch> {
    let mean = mean_yn(model, quad)?;
    let n = model.n_anchors() as f64;
    let m_opt = 1.0 / n;
    Ok(MomentMatch {
        mean_yn: mean,
        m_opt,
        v_opt: mean / (1.0 - m_opt * m_opt * n),
    })
}
