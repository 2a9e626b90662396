//! Brill-Lindquist initial data with charged holes.
//!
//! A [`HoleSet`] fixes the metric g = (chi psi)^2 delta on R^3 minus the holes.
//! On top of it the crate provides curvature and constraint checks
//! ([`geometry`]), an apparent-horizon finder with location and area checks
//! ([`horizon`]), the end-swapping inversion ([`inversion`]) and explicit upper
//! bounds for the intrinsic flat distance between a large ball and its flat
//! counterpart ([`flatdist`]).

// `!(x > 0.0)` is used on purpose: it rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flatdist;
pub mod geometry;
pub mod horizon;
pub mod inversion;
pub mod manifold;
pub mod numeric;
mod par;
pub mod qmc;
pub mod surface;

pub use error::{ConfigError, Error, Gate, Result, Violation};
pub use manifold::{presets, validate, ConformalJet, Hole, HoleSet, JetOrder, RawConfig, RawHole, SeparationData};
pub use surface::RadialSurface;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
