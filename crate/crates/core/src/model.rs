//! Random network model: anchors uniform over the annulus `d_min <= r <= d_max`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry and ranging quality of the random anchor deployment.
///
/// `t_s` is the effective ranging coefficient: SNR at unit distance times
/// the squared effective bandwidth, over the squared speed of light.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusModel {
    d_min: f64,
    d_max: f64,
    n_anchors: usize,
    t_s: f64,
}

impl AnnulusModel {
    pub fn new(d_min: f64, d_max: f64, n_anchors: usize, t_s: f64) -> Result<Self> {
        if !(d_min > 0.0) || !d_min.is_finite() {
            return Err(Error::InvalidModel(format!("d_min must be positive, got {d_min}")));
        }
        if !(d_max > d_min) || !d_max.is_finite() {
            return Err(Error::InvalidModel(format!(
                "d_max must exceed d_min = {d_min}, got {d_max}"
            )));
        }
        if n_anchors < 3 {
            return Err(Error::InvalidModel(format!(
                "at least 3 anchors are required, got {n_anchors}"
            )));
        }
        if !(t_s > 0.0) || !t_s.is_finite() {
            return Err(Error::InvalidModel(format!("t_s must be positive, got {t_s}")));
        }
        Ok(AnnulusModel {
            d_min,
            d_max,
            n_anchors,
            t_s,
        })
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn n_anchors(&self) -> usize {
        self.n_anchors
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    /// Same deployment with a different number of anchors.
    pub fn with_anchors(&self, n_anchors: usize) -> Result<Self> {
        AnnulusModel::new(self.d_min, self.d_max, n_anchors, self.t_s)
    }

    /// `d_max² - d_min²`, the normaliser of the squared-range distribution.
    pub fn area_span(&self) -> f64 {
        self.d_max * self.d_max - self.d_min * self.d_min
    }

    /// Support `[1/d_max², 1/d_min²]` of a single inverse-squared range.
    pub fn rii_support(&self) -> (f64, f64) {
        (1.0 / (self.d_max * self.d_max), 1.0 / (self.d_min * self.d_min))
    }
}

/// One realization of anchor ranges and bearings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSet {
    pub ranges: Vec<f64>,
    pub angles: Vec<f64>,
}

impl AnchorSet {
    pub fn new(ranges: Vec<f64>, angles: Vec<f64>) -> Result<Self> {
        if ranges.len() != angles.len() {
            return Err(Error::InvalidArgument(format!(
                "{} ranges but {} angles",
                ranges.len(),
                angles.len()
            )));
        }
        if ranges.len() < 3 {
            return Err(Error::InvalidArgument("at least 3 anchors are required".into()));
        }
        if ranges.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidArgument("ranges must be positive and finite".into()));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("angles must be finite".into()));
        }
        Ok(AnchorSet { ranges, angles })
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }
}

/// A reproducible random stream: a base seed plus an independent stream index.
///
/// Parallel Monte Carlo chunks draw from streams `0, 1, 2, ...` of the same
/// seed, so results do not depend on thread scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Draws a range with density `2r / (d_max² - d_min²)`.
#[inline]
pub fn sample_range<R: Rng + ?Sized>(model: &AnnulusModel, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    (model.d_min * model.d_min + u * model.area_span()).sqrt()
}

/// Draws a bearing uniform on `[0, 2π)`.
#[inline]
pub fn sample_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let theta = TAU * rng.random::<f64>();
    if theta >= TAU {
        theta - TAU
    } else {
        theta
    }
}

/// Draws an independent anchor set from the model.
pub fn sample_anchor_set<R: Rng + ?Sized>(model: &AnnulusModel, rng: &mut R) -> AnchorSet {
    let mut set = AnchorSet {
        ranges: Vec::with_capacity(model.n_anchors),
        angles: Vec::with_capacity(model.n_anchors),
    };
    sample_anchor_set_into(model, rng, &mut set);
    set
}

/// As [`sample_anchor_set`], reusing the buffers of `out`.
pub fn sample_anchor_set_into<R: Rng + ?Sized>(model: &AnnulusModel, rng: &mut R, out: &mut AnchorSet) {
    out.ranges.clear();
    out.angles.clear();
    for _ in 0..model.n_anchors {
        out.ranges.push(sample_range(model, rng));
        out.angles.push(sample_angle(rng));
    }
}

/// Range density `f_R(r)`.
pub fn pdf_range(model: &AnnulusModel, r: f64) -> f64 {
    if r < model.d_min || r > model.d_max {
        0.0
    } else {
        2.0 * r / model.area_span()
    }
}

/// Range cdf `P(R <= r)`.
pub fn cdf_range(model: &AnnulusModel, r: f64) -> f64 {
    ((r * r - model.d_min * model.d_min) / model.area_span()).clamp(0.0, 1.0)
}

/// Density of `A = R⁻²`: `1 / ((d_max² - d_min²) a²)` on the support.
pub fn pdf_rii(model: &AnnulusModel, a: f64) -> f64 {
    let (lo, hi) = model.rii_support();
    if a < lo || a > hi {
        0.0
    } else {
        1.0 / (model.area_span() * a * a)
    }
}

/// Ccdf of the nearest of the `N` anchor ranges, `P(R_(1) > r)`.
pub fn ccdf_nearest(model: &AnnulusModel, r: f64) -> f64 {
    (1.0 - cdf_range(model, r)).powi(model.n_anchors as i32)
}

/// Ccdf of the farthest of the `N` anchor ranges, `P(R_(N) > r)`.
pub fn ccdf_farthest(model: &AnnulusModel, r: f64) -> f64 {
    1.0 - cdf_range(model, r).powi(model.n_anchors as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> AnnulusModel {
        AnnulusModel::new(1.0, 10.0, 4, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(AnnulusModel::new(1.0, 1.0, 3, 1.0), Err(Error::InvalidModel(_))));
        assert!(AnnulusModel::new(0.0, 2.0, 3, 1.0).is_err());
        assert!(AnnulusModel::new(1.0, 2.0, 2, 1.0).is_err());
        assert!(AnnulusModel::new(1.0, 2.0, 3, 0.0).is_err());
        assert!(AnnulusModel::new(1.0, f64::INFINITY, 3, 1.0).is_err());
    }

    #[test]
    fn range_pdf_is_normalised_and_matches_cdf() {
        let m = model();
        let n = 20_000;
        let h = (m.d_max() - m.d_min()) / n as f64;
        let total: f64 = (0..n)
            .map(|i| pdf_range(&m, m.d_min() + (i as f64 + 0.5) * h) * h)
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert_eq!(pdf_range(&m, 0.5), 0.0);
        assert_eq!(cdf_range(&m, 10.0), 1.0);
    }

    #[test]
    fn order_statistic_ccdfs_bracket_single_range() {
        let m = model();
        for r in [1.5, 3.0, 7.0, 9.9] {
            let single = 1.0 - cdf_range(&m, r);
            assert!(ccdf_nearest(&m, r) <= single);
            assert!(ccdf_farthest(&m, r) >= single);
        }
    }

    #[test]
    fn samples_stay_in_support() {
        let m = model();
        let mut rng = RngStream::new(7, 0).generator();
        for _ in 0..10_000 {
            let s = sample_anchor_set(&m, &mut rng);
            assert_eq!(s.len(), 4);
            assert!(s.ranges.iter().all(|r| (1.0..=10.0).contains(r)));
            assert!(s.angles.iter().all(|a| (0.0..TAU).contains(a)));
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map({
            let mut g = RngStream::new(3, 1).generator();
            move |_| g.random()
        }).collect();
        let b: Vec<u64> = (0..4).map({
            let mut g = RngStream::new(3, 1).generator();
            move |_| g.random()
        }).collect();
        let c: Vec<u64> = (0..4).map({
            let mut g = RngStream::new(3, 2).generator();
            move |_| g.random()
        }).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
