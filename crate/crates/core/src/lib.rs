//! Outage analysis of range-based (TOA) localization with anchors drawn
//! uniformly from an annulus around the agent.
//!
//! The squared position error bound (SPEB) of a random anchor geometry is a
//! random variable. Its ccdf is estimated by simulation and approximated
//! analytically through Gil-Pelaez inversion; GDOP-based curves serve as
//! baselines.

// `!(a > b)` rejects NaN on purpose; long literals are published coefficients.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod charfun;
pub mod curve;
pub mod error;
pub mod methods;
pub mod model;
pub mod montecarlo;
pub mod outage;
pub mod quadrature;
pub mod specfun;
pub mod speb;

pub use curve::{CcdfCurve, CurveLabel, TabulatedCcdf};
pub use error::{Error, Result};
pub use methods::{CcdfMethod, MethodContext, MethodRegistry};
pub use model::{AnchorSet, AnnulusModel, RngStream};
pub use quadrature::QuadratureSpec;
