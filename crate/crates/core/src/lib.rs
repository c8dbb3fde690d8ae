//! Weighted anisotropic product Hardy-space toolkit.
//!
//! Everything lives on periodic sampled grids: expansive dilations and their
//! ellipsoid gauges, Christ-type dyadic cubes, Muckenhoupt weights, maximal
//! operators, Calderón reproducing frames, Lusin-area functions, the
//! constructive atomic decomposition and the operator-extension harness.

pub mod area;
pub mod atoms;
pub mod balls;
pub mod cubes;
pub mod dilation;
pub mod error;
pub mod field;
pub mod frames;
pub mod grid;
pub mod maximal;
pub mod operators;
pub mod weights;

pub use dilation::{
    norm_comparisons, validate_expansive, ComparisonReport, DilationDescriptor, EllipsoidGauge,
    ExpansiveDilation, QuasiNormValue,
};
pub use error::{Error, Result};
pub use field::{convolve, lp_norm, Field, Kernel, SpectralField};
pub use grid::GridSpec;
