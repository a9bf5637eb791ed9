//! Real (stop-band / standing-wave) parametric solutions and stop-band
//! metrics.
//!
//! With y = ctg psi the wave equation turns into quadratures: the standing
//! wave and its x-coordinate are
//!
//! ```text
//! W(psi) = w0 sin(psi) exp[- int Gdot cos^2(psi) dpsi]
//! X(psi) = x0 + (1/q0) [ int exp(-G) dpsi - 1/2 int Gdot exp(-G) sin(2 psi) dpsi ]
//! ```
//!
//! Over one pi-period of psi the wave picks up the factor -exp(-nu) while x
//! advances by the spatial period chi, with chi and nu given by the two
//! integrals in [`stopband_metrics`].

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::ode::{ode_solve, OdeOptions};
use crate::numerics::quad::{cumulative_gl5, quad_adaptive};
use crate::profile::{Modulation, RefractiveProfile};
use crate::real::Real;

/// One sampled branch of a parametric solution: psi, x = X(psi), the wave
/// W(psi), and the admittance Y(psi).
#[derive(Debug, Clone)]
pub struct ParametricCurve<T> {
    psi: Vec<T>,
    x: Vec<T>,
    w: Vec<Complex<T>>,
    y: Vec<Complex<T>>,
    w0: Complex<T>,
    x0: T,
    psi0: T,
    psi_period: Option<T>,
    monotone_x: bool,
}

impl<T: Real> ParametricCurve<T> {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        psi: Vec<T>,
        x: Vec<T>,
        w: Vec<Complex<T>>,
        y: Vec<Complex<T>>,
        w0: Complex<T>,
        x0: T,
        psi0: T,
        psi_period: Option<T>,
    ) -> Result<Self> {
        if psi.len() != x.len() || psi.len() != w.len() || psi.len() != y.len() {
            return Err(Error::invalid("ParametricCurve", "array length mismatch"));
        }
        if psi.is_empty() {
            return Err(Error::invalid("ParametricCurve", "empty sample set"));
        }
        for (i, win) in psi.windows(2).enumerate() {
            if !(win[1] > win[0]) {
                return Err(Error::invalid(
                    "ParametricCurve",
                    format!("psi not strictly increasing at index {}", i + 1),
                ));
            }
        }
        let monotone_x = x.windows(2).all(|w| w[1] > w[0]);
        Ok(ParametricCurve {
            psi,
            x,
            w,
            y,
            w0,
            x0,
            psi0,
            psi_period,
            monotone_x,
        })
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn psi(&self) -> &[T] {
        &self.psi
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn w(&self) -> &[Complex<T>] {
        &self.w
    }

    pub fn y(&self) -> &[Complex<T>] {
        &self.y
    }

    pub fn w0(&self) -> Complex<T> {
        self.w0
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    pub fn psi0(&self) -> T {
        self.psi0
    }

    /// The psi-period of the underlying modulation, when one exists
    /// (pi for stop-band curves, tau for family orbits).
    pub fn psi_period(&self) -> Option<T> {
        self.psi_period
    }

    /// False when X(psi) reversed direction somewhere on the grid.
    pub fn monotone_x(&self) -> bool {
        self.monotone_x
    }
}

/// Band-level metrics of a periodic solution.
///
/// For stop-band (standing-wave) metrics `mu` is the real attenuation rate
/// nu/chi; for transmission-band (family) metrics `mu` is the complex
/// increment per spatial period, (increment_real + i eta)/spatial_period.
#[derive(Debug, Clone, Copy)]
pub struct BandMetrics<T> {
    /// Spatial period chi of q(x).
    pub spatial_period: T,
    /// Attenuation per period (stop bands).
    pub nu: T,
    /// Phase advance of the wave per psi-period, radians.
    pub eta: T,
    /// Real part of ln W(psi + tau)/W(psi).
    pub increment_real: T,
    /// psi-period of the underlying orbit (pi for stop-band curves).
    pub tau: T,
    /// Modulation period T = (2 pi / eta) tau of the quasi-periodic envelope.
    pub t_modulation: T,
    /// Characteristic exponent, 1/length.
    pub mu: Complex<T>,
}

/// Integration constants of a parametric curve.
#[derive(Debug, Clone, Copy)]
pub struct CurveOptions<T> {
    pub w0: Complex<T>,
    pub x0: T,
}

impl<T: Real> Default for CurveOptions<T> {
    fn default() -> Self {
        CurveOptions {
            w0: Complex::new(T::one(), T::zero()),
            x0: T::zero(),
        }
    }
}

/// X'(psi) for the standing-wave branch: exp(-G) (1 - Gdot sin(2 psi)/2)/q0.
fn x_slope<T: Real>(modulation: &impl Modulation<T>, psi: T) -> T {
    let (g, gdot) = modulation.eval_g(psi);
    let s2 = (T::two() * psi).sin();
    (-g).exp() * (T::one() - gdot * s2 * T::half()) / modulation.q0()
}

/// Build the real standing-wave curve on the given increasing psi grid.
///
/// Cumulative integrals run from `psi_grid[0]` with one order-5
/// Gauss–Legendre panel per grid cell. Nodes of the wave (sin psi = 0) are
/// kept; the admittance there is recorded as an IEEE infinity.
pub fn real_parametric_curve<T: Real>(
    modulation: &impl Modulation<T>,
    psi_grid: &[T],
    opts: CurveOptions<T>,
) -> Result<ParametricCurve<T>> {
    if psi_grid.is_empty() {
        return Err(Error::invalid("real_parametric_curve", "empty psi grid"));
    }
    let psi0 = psi_grid[0];

    // X(psi) = x0 + cumulative of x_slope.
    let x_cum = cumulative_gl5(|p| x_slope(modulation, p), psi_grid);
    // Amplitude integral I(psi) = int Gdot cos^2 psi dpsi.
    let i_cum = cumulative_gl5(
        |p: T| {
            let (_, gdot) = modulation.eval_g(p);
            let c = p.cos();
            gdot * c * c
        },
        psi_grid,
    );

    let mut x = Vec::with_capacity(psi_grid.len());
    let mut w = Vec::with_capacity(psi_grid.len());
    let mut y = Vec::with_capacity(psi_grid.len());
    for ((&psi, &xc), &ic) in psi_grid.iter().zip(x_cum.iter()).zip(i_cum.iter()) {
        x.push(opts.x0 + xc);
        let (s, c) = psi.sin_cos();
        let amp = s * (-ic).exp();
        w.push(Complex::new(opts.w0.re * amp, opts.w0.im * amp));
        y.push(Complex::new(c / s, T::zero()));
    }

    ParametricCurve::new(
        psi_grid.to_vec(),
        x,
        w,
        y,
        opts.w0,
        opts.x0,
        psi0,
        Some(T::PI()),
    )
}

/// Uniform psi grid of `n` cells spanning `periods` pi-periods from psi0.
pub fn stopband_psi_grid<T: Real>(psi0: T, periods: usize, n: usize) -> Vec<T> {
    let total = T::PI() * T::of(periods.max(1) as f64);
    (0..=n)
        .map(|i| psi0 + total * T::of(i as f64) / T::of(n as f64))
        .collect()
}

/// Stop-band metrics by quadrature (absolute tolerance `tol`):
///
/// ```text
/// chi = (2/q0) int_0^pi exp(-G) sin^2(psi) dpsi
/// nu  =        int_0^pi G sin(2 psi) dpsi
/// ```
///
/// The standing wave satisfies W(psi+pi) = -exp(-nu) W(psi), so eta = pi and
/// the increment real part is -nu; mu is the attenuation rate nu/chi.
pub fn stopband_metrics<T: Real>(modulation: &impl Modulation<T>, tol: T) -> Result<BandMetrics<T>> {
    let pi = T::PI();
    let chi_int = quad_adaptive(
        |p: T| {
            let (g, _) = modulation.eval_g(p);
            let s = p.sin();
            (-g).exp() * s * s
        },
        T::zero(),
        pi,
        tol,
    )
    .require_converged(tol)?;
    let nu_int = quad_adaptive(
        |p: T| {
            let (g, _) = modulation.eval_g(p);
            g * (T::two() * p).sin()
        },
        T::zero(),
        pi,
        tol,
    )
    .require_converged(tol)?;

    let spatial_period = T::two() / modulation.q0() * chi_int.value;
    let nu = nu_int.value;
    Ok(BandMetrics {
        spatial_period,
        nu,
        eta: pi,
        increment_real: -nu,
        tau: pi,
        t_modulation: T::two() * pi,
        mu: Complex::new(nu / spatial_period, T::zero()),
    })
}

/// Integrate the phase equation psi' = q + (q'/2q) sin(2 psi) across the
/// medium's x grid, returning psi at every grid point.
pub fn phase_from_x<T: Real>(
    medium: &RefractiveProfile<T>,
    psi_init: T,
) -> Result<Vec<T>> {
    let x = medium.x_grid();
    let span = (x[0], x[x.len() - 1]);
    let opts = OdeOptions {
        h_max: Some((span.1 - span.0) / T::of(256.0)),
        ..OdeOptions::with_tol(T::of(3e-13))
    };
    let traj = ode_solve(
        |t, y: &[T; 1]| {
            let (q, qp) = medium.q_with_derivative(t);
            [q + qp / (T::two() * q) * (T::two() * y[0]).sin()]
        },
        span,
        [psi_init],
        &opts,
    )?;
    Ok(x.iter().map(|&xi| traj.eval(xi)[0]).collect())
}

/// X(psi) by direct quadrature from an anchor point (spectral accuracy; used
/// for off-grid evaluation and inversion).
pub fn x_of_psi<T: Real>(
    modulation: &impl Modulation<T>,
    psi_start: T,
    x_start: T,
    psi: T,
) -> T {
    if psi == psi_start {
        return x_start;
    }
    let (lo, hi, sign) = if psi > psi_start {
        (psi_start, psi, T::one())
    } else {
        (psi, psi_start, -T::one())
    };
    let r = quad_adaptive(|p| x_slope(modulation, p), lo, hi, T::of(1e-13));
    x_start + sign * r.value
}

/// Invert x = X(psi) by bracketing and Newton iteration. Requires the branch
/// to be strictly increasing (|Gdot| < 2 guarantees it).
pub fn psi_of_x<T: Real>(
    modulation: &impl Modulation<T>,
    psi_start: T,
    x_start: T,
    x: T,
) -> Result<T> {
    // March in psi until the target is bracketed.
    let step = T::half();
    let mut lo = psi_start;
    let mut x_lo = x_start;
    let mut hi = psi_start;
    let mut x_hi = x_start;
    let max_march = 10_000;
    if x >= x_start {
        for _ in 0..max_march {
            if x_hi >= x {
                break;
            }
            lo = hi;
            x_lo = x_hi;
            hi = hi + step;
            x_hi = x_of_psi(modulation, lo, x_lo, hi);
            if !(x_hi > x_lo) {
                return Err(Error::NonMonotoneX { index: 0 });
            }
        }
    } else {
        for _ in 0..max_march {
            if x_lo <= x {
                break;
            }
            hi = lo;
            x_hi = x_lo;
            lo = lo - step;
            x_lo = x_of_psi(modulation, hi, x_hi, lo);
            if !(x_lo < x_hi) {
                return Err(Error::NonMonotoneX { index: 0 });
            }
        }
    }

    // Newton from the cell midpoint, with bisection fallback.
    let mut psi = (lo + hi) * T::half();
    let mut x_at = x_of_psi(modulation, lo, x_lo, psi);
    for _ in 0..100 {
        let err = x_at - x;
        if err.abs() <= T::of(1e-14) * (T::one() + x.abs()) {
            return Ok(psi);
        }
        if err > T::zero() {
            hi = psi;
        } else {
            lo = psi;
        }
        let slope = x_slope(modulation, psi);
        let mut next = psi - err / slope;
        if !(next > lo) || !(next < hi) {
            next = (lo + hi) * T::half();
        }
        x_at = x_at + x_of_psi(modulation, psi, T::zero(), next);
        psi = next;
    }
    Ok(psi)
}

/// Standing wave W(psi)/w0 by direct quadrature from an anchor psi.
pub fn w_of_psi<T: Real>(modulation: &impl Modulation<T>, psi_start: T, psi: T) -> T {
    let (lo, hi, sign) = if psi >= psi_start {
        (psi_start, psi, T::one())
    } else {
        (psi, psi_start, -T::one())
    };
    let i = quad_adaptive(
        |p: T| {
            let (_, gdot) = modulation.eval_g(p);
            let c = p.cos();
            gdot * c * c
        },
        lo,
        hi,
        T::of(1e-13),
    );
    psi.sin() * (-(sign * i.value)).exp()
}
