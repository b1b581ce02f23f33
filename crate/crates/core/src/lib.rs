//! Pattern prediction, closed-form bounds and synthesis for isophoric planar
//! arrays thinned with two-dimensional difference sets.
//!
//! Lengths are in wavelengths throughout. Excitation grids are stored with the
//! first index (along `d1`) varying fastest.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod dft;
mod math;
mod par;

pub mod diffsets;
pub mod dsbounds;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod pattern;
pub mod sequences;
pub mod synthesis;

pub use num_complex::Complex64;

pub use diffsets::{Descriptors, DifferenceSet};
pub use dsbounds::{BoundsReport, ThetaBar, ThetaBarSource};
pub use error::{Error, Result};
pub use geometry::{Direction, GratingLobe, Steering, UnitCell};
pub use metrics::{MainlobeSpec, MetricsReport, Quadrature};
pub use pattern::{ElementPattern, PatternGrid, PowerTable};
pub use sequences::{AutocorrGrid, ExcitationGrid, SpectralSamples};
pub use synthesis::{SynthesisResult, SynthesisSpec};

/// Convert a linear power ratio to decibels; non-positive input maps to `-inf`.
pub fn to_db(x: f64) -> f64 {
    if x > 0.0 {
        10.0 * math::log10(x)
    } else {
        f64::NEG_INFINITY
    }
}

/// Convert decibels to a linear power ratio.
pub fn from_db(db: f64) -> f64 {
    math::pow(10.0, db / 10.0)
}
