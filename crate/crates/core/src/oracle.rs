//! Independent ground truth: direct integration of the wave equation,
//! monodromy matrices over one spatial period, Floquet multipliers and
//! characteristic exponents.
//!
//! Nothing here touches the parametric machinery — the point is to check it.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::ode::{ode_solve, OdeOptions};
use crate::profile::RefractiveProfile;
use crate::real::Real;

/// Band classification from the monodromy trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandKind {
    Stop,
    Transmission,
    Edge,
}

/// 2x2 real transfer matrix over one spatial period (columns propagated from
/// (w, w') = (1, 0) and (0, 1)), with its Floquet data.
#[derive(Debug, Clone, Copy)]
pub struct MonodromyResult<T> {
    pub matrix: [[T; 2]; 2],
    pub trace: T,
    pub det: T,
    /// Multipliers ordered by magnitude, largest first.
    pub multipliers: (Complex<T>, Complex<T>),
    /// Characteristic exponent, 1/length: principal-branch log of the
    /// attenuating multiplier over the period for stop bands; purely
    /// imaginary arccos(trace/2)/period for transmission bands. Imaginary
    /// part reported in [0, pi]/period.
    pub exponent_mu: Complex<T>,
    pub spatial_period: T,
}

/// Sampled direct solution of w'' + q^2(x) w = 0.
#[derive(Debug, Clone)]
pub struct WaveSolution<T> {
    pub x: Vec<T>,
    pub w: Vec<Complex<T>>,
    pub wprime: Vec<Complex<T>>,
}

/// Integrate the wave equation over the medium's grid from complex initial
/// conditions. The local step tolerance is set below the 1e-11 target so
/// the accumulated global error stays at that level over several periods.
pub fn integrate_wave<T: Real>(
    medium: &RefractiveProfile<T>,
    w_init: Complex<T>,
    wprime_init: Complex<T>,
) -> Result<WaveSolution<T>> {
    let x = medium.x_grid();
    let span = (x[0], x[x.len() - 1]);
    // Grid sampling goes through the cubic-Hermite dense output, so cap the
    // step to keep the interpolation error below the integration error.
    let opts = OdeOptions {
        h_max: Some((span.1 - span.0) / T::of(2048.0)),
        ..OdeOptions::with_tol(T::of(5e-13))
    };
    let traj = ode_solve(
        |xv, y: &[T; 4]| {
            let q = medium.q_at(xv);
            let q2 = q * q;
            [y[2], y[3], -q2 * y[0], -q2 * y[1]]
        },
        span,
        [w_init.re, w_init.im, wprime_init.re, wprime_init.im],
        &opts,
    )?;
    let mut w = Vec::with_capacity(x.len());
    let mut wprime = Vec::with_capacity(x.len());
    for &xi in x {
        let y = traj.eval(xi);
        w.push(Complex::new(y[0], y[1]));
        wprime.push(Complex::new(y[2], y[3]));
    }
    Ok(WaveSolution {
        x: x.to_vec(),
        w,
        wprime,
    })
}

fn integrate_wave_span<T: Real>(
    medium: &RefractiveProfile<T>,
    span: (T, T),
    w_init: Complex<T>,
    wprime_init: Complex<T>,
) -> Result<crate::numerics::ode::OdeTrajectory<T, 4>> {
    // State [Re w, Im w, Re w', Im w'].
    ode_solve(
        |xv, y: &[T; 4]| {
            let q = medium.q_at(xv);
            let q2 = q * q;
            [y[2], y[3], -q2 * y[0], -q2 * y[1]]
        },
        span,
        [w_init.re, w_init.im, wprime_init.re, wprime_init.im],
        &OdeOptions::with_tol(T::of(5e-13)),
    )
}

/// Monodromy matrix over one spatial period of the medium.
pub fn monodromy<T: Real>(medium: &RefractiveProfile<T>) -> Result<MonodromyResult<T>> {
    let period = medium.spatial_period().ok_or(Error::NotPeriodic)?;
    let x0 = medium.x_grid()[0];
    let span = (x0, x0 + period);
    let x_end = medium.x_grid()[medium.x_grid().len() - 1];
    if x_end < x0 + period * (T::one() - T::of(1e-10)) {
        return Err(Error::invalid(
            "monodromy",
            "medium grid does not cover one spatial period",
        ));
    }

    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    let col1 = integrate_wave_span(medium, span, one, zero)?.last();
    let col2 = integrate_wave_span(medium, span, zero, one)?.last();

    let matrix = [[col1[0], col2[0]], [col1[2], col2[2]]];
    let trace = matrix[0][0] + matrix[1][1];
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];

    // Multipliers: roots of lambda^2 - trace lambda + 1 (det = 1 by
    // Liouville; checked by callers at 1e-8).
    let half_tr = trace * T::half();
    let disc = half_tr * half_tr - T::one();
    let (l1, l2) = if disc >= T::zero() {
        let root = disc.sqrt();
        let a = half_tr + root.copysign(half_tr);
        // a is the larger-magnitude root; the other is 1/a.
        (Complex::new(a, T::zero()), Complex::new(T::one() / a, T::zero()))
    } else {
        let root = (-disc).sqrt();
        (
            Complex::new(half_tr, root),
            Complex::new(half_tr, -root),
        )
    };
    let (l_big, l_small) = if l1.norm() >= l2.norm() { (l1, l2) } else { (l2, l1) };

    let exponent_mu = if disc > T::zero() {
        // Stop band: principal log of the attenuating multiplier, imaginary
        // part folded into [0, pi].
        let mag = l_small.norm();
        let arg = if l_small.re < T::zero() { T::PI() } else { T::zero() };
        Complex::new(mag.ln() / period, arg / period)
    } else {
        // Transmission band (or edge): purely imaginary exponent.
        let phase = (trace * T::half()).max(-T::one()).min(T::one()).acos();
        Complex::new(T::zero(), phase / period)
    };

    Ok(MonodromyResult {
        matrix,
        trace,
        det,
        multipliers: (l_big, l_small),
        exponent_mu,
        spatial_period: period,
    })
}

/// Stop / transmission / edge from the monodromy trace at tolerance `tol`.
pub fn classify_band<T: Real>(result: &MonodromyResult<T>, tol: T) -> BandKind {
    let t = result.trace.abs();
    if t > T::two() + tol {
        BandKind::Stop
    } else if t < T::two() - tol {
        BandKind::Transmission
    } else {
        BandKind::Edge
    }
}
