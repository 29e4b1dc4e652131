//! Named ccdf methods behind a common interface, selectable at runtime.

use std::collections::BTreeMap;

use crate::curve::{CcdfCurve, CurveLabel};
use crate::error::{Error, Result};
use crate::model::AnnulusModel;
use crate::montecarlo::empirical_speb_ccdf;
use crate::outage::{gdop_bound_ccdfs, gdop_ccdf, speb_ccdf_approx};
use crate::quadrature::QuadratureSpec;

/// Everything a method may need besides the SPEB grid.
#[derive(Debug, Clone, Copy)]
pub struct MethodContext<'a> {
    pub model: &'a AnnulusModel,
    pub quad: &'a QuadratureSpec,
    /// Monte Carlo draws, for sampling-based methods.
    pub samples: usize,
    pub seed: u64,
}

/// A way of producing SPEB ccdf curves on a given grid.
pub trait CcdfMethod: Send + Sync {
    fn name(&self) -> &'static str;

    /// Labels of the curves returned by [`CcdfMethod::compute`], in order.
    fn labels(&self) -> &'static [CurveLabel];

    fn compute(&self, ctx: &MethodContext<'_>, u_grid: &[f64]) -> Result<Vec<CcdfCurve>>;
}

struct MonteCarlo;

impl CcdfMethod for MonteCarlo {
    fn name(&self) -> &'static str {
        "mc"
    }

    fn labels(&self) -> &'static [CurveLabel] {
        &[CurveLabel::Mc]
    }

    fn compute(&self, ctx: &MethodContext<'_>, u_grid: &[f64]) -> Result<Vec<CcdfCurve>> {
        let report = empirical_speb_ccdf(ctx.model, ctx.samples, ctx.seed, u_grid)?;
        Ok(vec![report.empirical_curve])
    }
}

struct MomentMatched;

impl CcdfMethod for MomentMatched {
    fn name(&self) -> &'static str {
        "approx"
    }

    fn labels(&self) -> &'static [CurveLabel] {
        &[CurveLabel::Approx]
    }

    fn compute(&self, ctx: &MethodContext<'_>, u_grid: &[f64]) -> Result<Vec<CcdfCurve>> {
        Ok(vec![speb_ccdf_approx(ctx.model, u_grid, ctx.quad)?])
    }
}

struct Gdop;

impl CcdfMethod for Gdop {
    fn name(&self) -> &'static str {
        "gdop"
    }

    fn labels(&self) -> &'static [CurveLabel] {
        &[CurveLabel::Gdop]
    }

    fn compute(&self, ctx: &MethodContext<'_>, u_grid: &[f64]) -> Result<Vec<CcdfCurve>> {
        Ok(vec![gdop_ccdf(ctx.model, u_grid, ctx.quad)?])
    }
}

struct GdopBounds;

impl CcdfMethod for GdopBounds {
    fn name(&self) -> &'static str {
        "bounds"
    }

    fn labels(&self) -> &'static [CurveLabel] {
        &[CurveLabel::GdopLower, CurveLabel::GdopUpper]
    }

    fn compute(&self, ctx: &MethodContext<'_>, u_grid: &[f64]) -> Result<Vec<CcdfCurve>> {
        let (lower, upper) = gdop_bound_ccdfs(ctx.model, u_grid, ctx.quad)?;
        Ok(vec![lower, upper])
    }
}

/// Methods keyed by name.
pub struct MethodRegistry {
    methods: BTreeMap<&'static str, Box<dyn CcdfMethod>>,
}

impl MethodRegistry {
    pub fn empty() -> Self {
        MethodRegistry {
            methods: BTreeMap::new(),
        }
    }

    /// The Monte Carlo reference, the moment-matched approximation, the GDOP
    /// ccdf and the pair of GDOP bounds.
    pub fn standard() -> Self {
        let mut r = MethodRegistry::empty();
        r.register(Box::new(MonteCarlo));
        r.register(Box::new(MomentMatched));
        r.register(Box::new(Gdop));
        r.register(Box::new(GdopBounds));
        r
    }

    /// Adds a method, replacing any previous one with the same name.
    pub fn register(&mut self, method: Box<dyn CcdfMethod>) {
        self.methods.insert(method.name(), method);
    }

    pub fn get(&self, name: &str) -> Result<&dyn CcdfMethod> {
        self.methods
            .get(name)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::UnknownMethod(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.keys().copied().collect()
    }

    /// Resolves a comma-separated list, keeping the first occurrence of each name.
    pub fn resolve(&self, list: &str) -> Result<Vec<&dyn CcdfMethod>> {
        let mut seen = Vec::new();
        let mut out = Vec::new();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if seen.contains(&name) {
                continue;
            }
            seen.push(name);
            out.push(self.get(name)?);
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument("no ccdf methods selected".into()));
        }
        Ok(out)
    }
}

impl Default for MethodRegistry {
    fn default() -> Self {
        MethodRegistry::standard()
    }
}
