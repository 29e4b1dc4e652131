//! Tabulated complementary distribution functions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest upward step a computed ccdf may show before it is treated as a
/// numerical failure instead of rounding noise.
pub const RIPPLE_LIMIT: f64 = 1e-6;

/// Method that produced a SPEB ccdf curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveLabel {
    Mc,
    Approx,
    Gdop,
    GdopLower,
    GdopUpper,
}

impl CurveLabel {
    pub const ALL: [CurveLabel; 5] = [
        CurveLabel::Mc,
        CurveLabel::Approx,
        CurveLabel::Gdop,
        CurveLabel::GdopLower,
        CurveLabel::GdopUpper,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CurveLabel::Mc => "mc",
            CurveLabel::Approx => "approx",
            CurveLabel::Gdop => "gdop",
            CurveLabel::GdopLower => "gdop_lower",
            CurveLabel::GdopUpper => "gdop_upper",
        }
    }

    /// Empirical curves are step functions; analytic ones interpolate linearly.
    pub fn is_empirical(&self) -> bool {
        matches!(self, CurveLabel::Mc)
    }
}

impl fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CurveLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CurveLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

fn check_table(abscissae: &[f64], values: &[f64]) -> Result<()> {
    if abscissae.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "{} abscissae but {} values",
            abscissae.len(),
            values.len()
        )));
    }
    if abscissae.is_empty() {
        return Err(Error::InvalidArgument("a ccdf table needs at least one point".into()));
    }
    if abscissae.iter().any(|x| !x.is_finite()) || abscissae.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("abscissae must be finite and strictly ascending".into()));
    }
    if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidArgument("ccdf values must lie in [0, 1]".into()));
    }
    if values.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("ccdf values must be non-increasing".into()));
    }
    Ok(())
}

/// Clamps to `[0, 1]` and removes upward steps no larger than [`RIPPLE_LIMIT`].
pub(crate) fn monotonize(values: &mut [f64], what: &str) -> Result<()> {
    for v in values.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let mut running = f64::INFINITY;
    let mut worst: f64 = 0.0;
    for v in values.iter_mut() {
        if *v > running {
            worst = worst.max(*v - running);
            *v = running;
        } else {
            running = *v;
        }
    }
    if worst > RIPPLE_LIMIT {
        return Err(Error::Ripple {
            what: what.to_string(),
            amplitude: worst,
            limit: RIPPLE_LIMIT,
        });
    }
    Ok(())
}

/// Piecewise-linear interpolation on a sorted table, flat beyond the ends.
pub(crate) fn interpolate_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&a| a <= x);
    if i == 0 {
        return ys[0];
    }
    if i == xs.len() {
        return ys[xs.len() - 1];
    }
    let (x0, x1) = (xs[i - 1], xs[i]);
    let w = (x - x0) / (x1 - x0);
    ys[i - 1] + w * (ys[i] - ys[i - 1])
}

/// Right-continuous step interpolation: the value at the last abscissa `<= x`,
/// and the first value to the left of the table.
pub(crate) fn interpolate_step(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&a| a <= x);
    if i == 0 {
        ys[0]
    } else {
        ys[i - 1]
    }
}

/// A ccdf sampled on an ascending grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCcdf {
    abscissae: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedCcdf {
    pub fn new(abscissae: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_table(&abscissae, &values)?;
        Ok(TabulatedCcdf { abscissae, values })
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    pub fn at(&self, x: f64) -> f64 {
        interpolate_linear(&self.abscissae, &self.values, x)
    }
}

/// A SPEB ccdf produced by one of the methods in [`CurveLabel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfCurve {
    label: CurveLabel,
    abscissae: Vec<f64>,
    values: Vec<f64>,
}

impl CcdfCurve {
    pub fn new(label: CurveLabel, abscissae: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_table(&abscissae, &values)?;
        Ok(CcdfCurve {
            label,
            abscissae,
            values,
        })
    }

    pub fn label(&self) -> CurveLabel {
        self.label
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    /// Value at `x`, using step interpolation for empirical curves and
    /// linear interpolation otherwise.
    pub fn at(&self, x: f64) -> f64 {
        if self.label.is_empirical() {
            interpolate_step(&self.abscissae, &self.values, x)
        } else {
            interpolate_linear(&self.abscissae, &self.values, x)
        }
    }

    pub fn into_table(self) -> TabulatedCcdf {
        TabulatedCcdf {
            abscissae: self.abscissae,
            values: self.values,
        }
    }
}
