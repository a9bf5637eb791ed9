//! Crate-wide error type. Positions carried in the variants are reported in
//! `f64` regardless of the working scalar so the type stays non-generic.

/// Errors raised by construction, quadrature, integration, and the band
/// pipelines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// X(psi) is not strictly increasing, so the inversion x -> psi is undefined.
    #[error("x(psi) is not strictly increasing at sample index {index}")]
    NonMonotoneX { index: usize },

    /// Adaptive ODE stepper could not meet the local tolerance above the
    /// minimum step size.
    #[error("adaptive step size underflow at t = {t}")]
    StepFailure { t: f64 },

    /// The energy-like denominator of the G-recovery integral crossed zero.
    #[error("denominator cdot^2 + 4c^2 - 1 vanishes at psi = {psi}")]
    DenominatorVanishes { psi: f64 },

    /// Admittance pole (c, cdot) = (0, 1): node of the wave function.
    #[error("admittance pole at c = 0, cdot = 1{}", .psi.map(|p| format!(" (psi = {p})")).unwrap_or_default())]
    AdmittancePole { psi: Option<f64> },

    /// Quasi-phase logarithm branch undefined: w' + i q w vanished.
    #[error("quasi-phase branch undefined: |y + i| = {value} < {floor} at x = {x}")]
    BranchFailure { x: f64, value: f64, floor: f64 },

    /// The radicand has no adjacent root on one side: motion is unbounded.
    #[error("no bounded orbit: radicand has no root on the {side} side of the start")]
    NoBoundedOrbit { side: &'static str },

    /// M(C) vanishes on the orbit, so Gdot = M'/M is singular there.
    #[error("M(C) vanishes on the orbit near C = {c}")]
    MVanishes { c: f64 },

    /// The potential has odd content, so the even-M phase formula does not apply.
    #[error("potential is not even in C")]
    NotEven,

    /// Phase advance per period is zero; the modulation period is undefined.
    #[error("phase advance eta = 0: modulation period undefined")]
    ZeroEta,

    /// Complete elliptic integral requested at modulus >= 1.
    #[error("elliptic modulus must satisfy p < 1, got p = {p}")]
    ModulusOne { p: f64 },

    /// A turning-point quadrature endpoint is not a simple root of the radicand.
    #[error("radicand endpoint {c} is not a simple root (|R'| = {deriv:.3e})")]
    NotSimpleRoot { c: f64, deriv: f64 },

    /// Monodromy requested on a medium without a spatial period.
    #[error("medium has no spatial period")]
    NotPeriodic,

    /// Closed-form evaluation requested for a tabulated potential.
    #[error("no closed form for this potential variant")]
    NoClosedForm,

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature tolerance not met: error estimate {err:.3e} > {tol:.3e}")]
    ToleranceNotMet { err: f64, tol: f64 },

    /// Constructor-level validation failure.
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            why: why.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
