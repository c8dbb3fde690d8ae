//! The verification suites. Each returns a [`crate::SuiteReport`] with one
//! outcome per acceptance criterion it covers.

pub mod area;
pub mod decompose;
pub mod frames;
pub mod geometry;
pub mod journe;
pub mod operators;
pub mod weights;

use aniso_hardy::dilation::DilationDescriptor;
use aniso_hardy::EllipsoidGauge;

use crate::Result;

pub(crate) fn gauge(d: &DilationDescriptor) -> Result<EllipsoidGauge> {
    Ok(EllipsoidGauge::build(&d.build()?)?)
}

pub(crate) fn label(d: &DilationDescriptor) -> String {
    serde_json::to_string(&d.matrix).unwrap_or_default()
}

/// Every value within ±`tol` of the median.
pub(crate) fn within_median(xs: &[f64], tol: f64) -> (bool, f64) {
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let med = s[s.len() / 2];
    (xs.iter().all(|x| x.is_finite() && (x - med).abs() <= tol * med.abs()), med)
}
