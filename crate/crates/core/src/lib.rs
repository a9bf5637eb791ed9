//! Parametric (phase-parameter) representation of one-dimensional wave
//! propagation in nonuniform periodic media.
//!
//! The wave equation w'' + q^2(x) w = 0 is solved parametrically: a phase
//! parameter psi replaces x as the independent variable, the medium enters
//! through a log-modulation G(psi) with Q(psi) = q0 exp(G), and both
//! standing-wave (stop-band) and travelling-wave (transmission-band)
//! solutions come out in closed quadrature form. An independent direct
//! integration / monodromy oracle cross-checks every pipeline.
//!
//! Modules:
//! - [`profile`] — the medium modulation G(psi) and refractive profiles q(x)
//! - [`realband`] — real standing-wave curves and stop-band metrics
//! - [`complexband`] — complex quasi-phase formalism: the C(psi) equation,
//!   complex admittance, transmission-band parametric curves
//! - [`families`] — integrable potentials M(C): closed forms, periods,
//!   complex increments, phase advances
//! - [`oracle`] — direct wave integration, monodromy matrices, Floquet
//!   multipliers
//! - [`design`] — derivative-free search for stop-band-maximizing profiles
//! - [`numerics`] — quadrature, ODE stepping, elliptic functions,
//!   interpolation
//!
//! All core math is generic over the scalar type via [`real::Real`]
//! (`f32` or `f64`); concrete `f64`/`f32` aliases live at the crate root.

pub mod complexband;
pub mod design;
pub mod error;
pub mod export;
pub mod families;
pub mod numerics;
pub mod oracle;
pub mod profile;
pub mod real;
pub mod realband;

pub use error::{Error, Result};
pub use real::Real;

/// `f64` aliases for the main domain types.
pub type PhaseProfile64 = profile::PhaseProfile<f64>;
pub type RefractiveProfile64 = profile::RefractiveProfile<f64>;
pub type ParametricCurve64 = realband::ParametricCurve<f64>;
pub type BandMetrics64 = realband::BandMetrics<f64>;
pub type CFunction64 = complexband::CFunction<f64>;
pub type PotentialFamily64 = families::PotentialFamily<f64>;
pub type MonodromyResult64 = oracle::MonodromyResult<f64>;
pub type DesignSpec64 = design::DesignSpec<f64>;

/// `f32` aliases for the main domain types.
pub type PhaseProfile32 = profile::PhaseProfile<f32>;
pub type RefractiveProfile32 = profile::RefractiveProfile<f32>;
pub type ParametricCurve32 = realband::ParametricCurve<f32>;
pub type BandMetrics32 = realband::BandMetrics<f32>;
pub type CFunction32 = complexband::CFunction<f32>;
pub type PotentialFamily32 = families::PotentialFamily<f32>;
pub type MonodromyResult32 = oracle::MonodromyResult<f32>;
pub type DesignSpec32 = design::DesignSpec<f32>;
