//! Analytic and semi-analytic SPEB ccdfs.

pub mod approx;
pub mod gdop;
pub mod moments;
pub mod wn;

pub use approx::{speb_ccdf_approx, speb_ccdf_approx_mc, speb_ccdf_approx_with, xn_ccdf_table};
pub use gdop::{gdop_bound_ccdfs, gdop_ccdf};
pub use moments::{mean_yn, moment_match, rho_bounds, weight_ccdf, MomentMatch};
pub use wn::{wn_ccdf, wn_table, WnTable};
