//! Complex quasi-phase formalism: the auxiliary C(psi) equation, recovery of
//! the modulation G from C, the complex admittance, and transmission-band
//! parametric curves.
//!
//! The scalar function C(psi) = Re Y / |Y + i|^2 obeys
//!
//! ```text
//! Cddot + 4 C = (Gdot/2) (Cdot^2 + 4 C^2 - 1)
//! ```
//!
//! Either direction works: pick G and integrate the ODE, or pick C and
//! recover G by quadrature. The complex admittance, the wave W, and the
//! coordinate X all follow from (C, Cdot) by quadratures.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::interp::CubicSpline;
use crate::numerics::interp::SplineEnds;
use crate::numerics::ode::{ode_solve, OdeOptions, OdeTrajectory};
use crate::numerics::quad::cumulative_gl5;
use crate::profile::{Modulation, SampledModulation};
use crate::real::Real;
use crate::realband::{CurveOptions, ParametricCurve};

/// Default floor for the energy-like denominator of the G-recovery integral.
pub const DENOM_FLOOR: f64 = 1e-8;
/// Default floor for the admittance-pole denominator 4C^2 + (1 - Cdot)^2.
pub const POLE_FLOOR: f64 = 1e-10;

enum CEvaluator<T: Real> {
    /// psi -> (C, Cdot, Cddot).
    Analytic(Box<dyn Fn(T) -> (T, T, T) + Send + Sync>),
    /// Numeric trajectory with state [C, Cdot]; Cddot comes from the stored
    /// stage derivatives.
    Trajectory(OdeTrajectory<T, 2>),
}

/// The auxiliary function C(psi) with its first two derivatives, sampled on
/// a grid and densely evaluable.
pub struct CFunction<T: Real> {
    psi: Vec<T>,
    c: Vec<T>,
    cdot: Vec<T>,
    cddot: Vec<T>,
    eval: CEvaluator<T>,
}

impl<T: Real> std::fmt::Debug for CFunction<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CFunction")
            .field("samples", &self.psi.len())
            .field(
                "kind",
                &match self.eval {
                    CEvaluator::Analytic(_) => "closed_form",
                    CEvaluator::Trajectory(_) => "numeric",
                },
            )
            .finish()
    }
}

impl<T: Real> CFunction<T> {
    /// Closed-form source: `f(psi) = (C, Cdot, Cddot)`.
    pub fn from_fn(
        psi_grid: Vec<T>,
        f: impl Fn(T) -> (T, T, T) + Send + Sync + 'static,
    ) -> Result<Self> {
        if psi_grid.len() < 2 {
            return Err(Error::invalid("CFunction", "need at least two samples"));
        }
        let mut c = Vec::with_capacity(psi_grid.len());
        let mut cdot = Vec::with_capacity(psi_grid.len());
        let mut cddot = Vec::with_capacity(psi_grid.len());
        for &p in &psi_grid {
            let (v, d, dd) = f(p);
            c.push(v);
            cdot.push(d);
            cddot.push(dd);
        }
        Ok(CFunction {
            psi: psi_grid,
            c,
            cdot,
            cddot,
            eval: CEvaluator::Analytic(Box::new(f)),
        })
    }

    fn from_trajectory(traj: OdeTrajectory<T, 2>, psi_grid: Vec<T>) -> Self {
        let mut c = Vec::with_capacity(psi_grid.len());
        let mut cdot = Vec::with_capacity(psi_grid.len());
        let mut cddot = Vec::with_capacity(psi_grid.len());
        for &p in &psi_grid {
            let (y, dy) = traj.eval_with_derivative(p);
            c.push(y[0]);
            cdot.push(y[1]);
            cddot.push(dy[1]);
        }
        CFunction {
            psi: psi_grid,
            c,
            cdot,
            cddot,
            eval: CEvaluator::Trajectory(traj),
        }
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.eval, CEvaluator::Analytic(_))
    }

    pub fn psi(&self) -> &[T] {
        &self.psi
    }

    pub fn c(&self) -> &[T] {
        &self.c
    }

    pub fn cdot(&self) -> &[T] {
        &self.cdot
    }

    pub fn cddot(&self) -> &[T] {
        &self.cddot
    }

    /// Dense evaluation of (C, Cdot, Cddot) at psi.
    pub fn eval(&self, psi: T) -> (T, T, T) {
        match &self.eval {
            CEvaluator::Analytic(f) => f(psi),
            CEvaluator::Trajectory(traj) => {
                let (y, dy) = traj.eval_with_derivative(psi);
                (y[0], y[1], dy[1])
            }
        }
    }
}

/// Integrate the C-equation for a given modulation from (c_init, cdot_init)
/// over `psi_span`. Local tolerance 1e-10; the step size is capped so the
/// trajectory has at least `min_samples` accepted steps.
///
/// Samples sit on the accepted steps, where the stored derivatives are exact
/// right-hand-side evaluations, so the C-equation residual at the sample
/// grid is machine-level. Between samples the evaluator interpolates.
pub fn c_ode_solve<T: Real>(
    modulation: &impl Modulation<T>,
    c_init: T,
    cdot_init: T,
    psi_span: (T, T),
    min_samples: usize,
) -> Result<CFunction<T>> {
    let (lo, hi) = psi_span;
    if !(hi > lo) {
        return Err(Error::invalid("c_ode_solve", "psi span must be increasing"));
    }
    let opts = OdeOptions {
        h_max: Some((hi - lo) / T::of(min_samples.max(16) as f64)),
        ..OdeOptions::with_tol(T::of(1e-10))
    };
    let traj = ode_solve(
        |psi, y: &[T; 2]| {
            let (_, gdot) = modulation.eval_g(psi);
            let energy = y[1] * y[1] + T::of(4.0) * y[0] * y[0] - T::one();
            [y[1], -T::of(4.0) * y[0] + gdot * T::half() * energy]
        },
        psi_span,
        [c_init, cdot_init],
        &opts,
    )?;
    let grid = traj.t.clone();
    Ok(CFunction::from_trajectory(traj, grid))
}

/// Recover the modulation from a C-function:
/// G(psi) = 2 int (Cddot + 4C) / (Cdot^2 + 4C^2 - 1) dpsi, with G = 0 at the
/// grid start. Fails with `DenominatorVanishes` when the energy-like
/// denominator dips below `denom_floor` anywhere on (a refinement of) the
/// grid — on that manifold G is genuinely undetermined by C.
pub fn g_from_c<T: Real>(
    cfun: &CFunction<T>,
    q0: T,
    denom_floor: T,
) -> Result<SampledModulation<T>> {
    let gdot_at = |psi: T| {
        let (c, cdot, cddot) = cfun.eval(psi);
        let denom = cdot * cdot + T::of(4.0) * c * c - T::one();
        (T::two() * (cddot + T::of(4.0) * c) / denom, denom)
    };

    // Denominator scan on a 4x refinement of the sample grid.
    for w in cfun.psi.windows(2) {
        for k in 0..4 {
            let p = w[0] + (w[1] - w[0]) * T::of(k as f64 / 4.0);
            let (_, denom) = gdot_at(p);
            if denom.abs() < denom_floor {
                return Err(Error::DenominatorVanishes {
                    psi: p.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }
    let (_, denom_last) = gdot_at(cfun.psi[cfun.psi.len() - 1]);
    if denom_last.abs() < denom_floor {
        return Err(Error::DenominatorVanishes {
            psi: cfun.psi[cfun.psi.len() - 1].to_f64().unwrap_or(f64::NAN),
        });
    }

    let g = cumulative_gl5(|p| gdot_at(p).0, &cfun.psi);
    let gdot: Vec<T> = cfun.psi.iter().map(|&p| gdot_at(p).0).collect();
    SampledModulation::new(q0, cfun.psi.clone(), g, gdot)
}

/// Complex admittance and the associated polar / auxiliary quantities at one
/// point of a C-trajectory.
#[derive(Debug, Clone, Copy)]
pub struct ComplexAdmittanceState<T> {
    /// Y = R exp(i theta).
    pub y: Complex<T>,
    /// Modulus R of the admittance.
    pub r: T,
    /// Principal-branch angle theta in (-pi, pi]; unwrap along trajectories
    /// with [`unwrap_angles`].
    pub theta: T,
    /// S = Im Y / |Y + i|^2.
    pub s: T,
    /// C = Re Y / |Y + i|^2; reproduces the input c.
    pub c_aux: T,
    /// J = R sin(theta) / (R^2 + 1).
    pub j: T,
    /// Value of the first integral (equals J pointwise).
    pub e: T,
}

/// Admittance from (C, Cdot):
/// Y = [4C + i(1 - 4C^2 - Cdot^2)] / [4C^2 + (1 - Cdot)^2].
pub fn admittance_from_c<T: Real>(c: T, cdot: T) -> Result<ComplexAdmittanceState<T>> {
    let four = T::of(4.0);
    let denom = four * c * c + (T::one() - cdot) * (T::one() - cdot);
    if denom < T::of(1e-280) {
        return Err(Error::AdmittancePole { psi: None });
    }
    let y = Complex::new(
        four * c / denom,
        (T::one() - four * c * c - cdot * cdot) / denom,
    );
    let r = y.norm();
    let theta = y.im.atan2(y.re);
    let y_plus_i = y.norm_sqr() + T::two() * y.im + T::one();
    Ok(ComplexAdmittanceState {
        y,
        r,
        theta,
        s: y.im / y_plus_i,
        c_aux: y.re / y_plus_i,
        j: y.im / (y.norm_sqr() + T::one()),
        e: y.im / (y.norm_sqr() + T::one()),
    })
}

/// Make an angle series branch-continuous: shift each sample by the multiple
/// of 2 pi nearest to its predecessor.
pub fn unwrap_angles<T: Real>(theta: &mut [T]) {
    let two_pi = T::two() * T::PI();
    for i in 1..theta.len() {
        let mut d = theta[i] - theta[i - 1];
        while d > T::PI() {
            theta[i] = theta[i] - two_pi;
            d = theta[i] - theta[i - 1];
        }
        while d < -T::PI() {
            theta[i] = theta[i] + two_pi;
            d = theta[i] - theta[i - 1];
        }
    }
}

/// Transmission-band parametric curve from a modulation and a C-function:
///
/// ```text
/// X(psi) = x0 + int (1 - Gdot C) / Q dpsi
/// W(psi) = w0 exp[ int (1 - Gdot C) Y dpsi ]
/// ```
///
/// Cumulative quadrature on the C-function's own grid. Raises
/// `AdmittancePole` when the admittance denominator dips below `POLE_FLOOR`
/// on the grid; a sign change of (1 - Gdot C) is flagged through
/// `monotone_x`, not fatal.
pub fn parametric_from_c<T: Real>(
    modulation: &impl Modulation<T>,
    cfun: &CFunction<T>,
    opts: CurveOptions<T>,
    psi_period: Option<T>,
) -> Result<ParametricCurve<T>> {
    let grid = &cfun.psi;

    // Pole scan (grid nodes and midpoints).
    let pole_floor = T::of(POLE_FLOOR);
    let check = |p: T| -> Result<()> {
        let (c, cdot, _) = cfun.eval(p);
        let denom = T::of(4.0) * c * c + (T::one() - cdot) * (T::one() - cdot);
        if denom < pole_floor {
            return Err(Error::AdmittancePole {
                psi: Some(p.to_f64().unwrap_or(f64::NAN)),
            });
        }
        Ok(())
    };
    for w in grid.windows(2) {
        check(w[0])?;
        check((w[0] + w[1]) * T::half())?;
    }
    check(grid[grid.len() - 1])?;

    let x_cum = cumulative_gl5(
        |p: T| {
            let (_, gdot) = modulation.eval_g(p);
            let (c, _, _) = cfun.eval(p);
            (T::one() - gdot * c) / modulation.eval_q(p)
        },
        grid,
    );
    let lnw_cum = cumulative_gl5(
        |p: T| {
            let (_, gdot) = modulation.eval_g(p);
            let (c, cdot, _) = cfun.eval(p);
            let adm = admittance_from_c(c, cdot).expect("pole scan passed");
            adm.y * (T::one() - gdot * c)
        },
        grid,
    );

    let mut x = Vec::with_capacity(grid.len());
    let mut w = Vec::with_capacity(grid.len());
    let mut y = Vec::with_capacity(grid.len());
    for (i, &psi) in grid.iter().enumerate() {
        x.push(opts.x0 + x_cum[i]);
        w.push(opts.w0 * lnw_cum[i].exp());
        let (c, cdot, _) = cfun.eval(psi);
        y.push(admittance_from_c(c, cdot)?.y);
    }

    ParametricCurve::new(grid.clone(), x, w, y, opts.w0, opts.x0, grid[0], psi_period)
}

/// Quasi-phase of a sampled complex wave:
/// `psi(x) = int [ q + (q'/q) Re(y)/|y+i|^2 ] dx`, cumulative from `x_grid[0]`.
///
/// The admittance factor is computed in the pole-free form
/// Re(w' conj(q w)) / |w' + i q w|^2, so nodes of w are harmless; the branch
/// genuinely fails only where w' + i q w vanishes.
pub fn quasi_phase<T: Real>(
    w_samples: &[Complex<T>],
    wprime_samples: &[Complex<T>],
    q_samples: &[T],
    x_grid: &[T],
) -> Result<Vec<T>> {
    let n = x_grid.len();
    if w_samples.len() != n || wprime_samples.len() != n || q_samples.len() != n {
        return Err(Error::invalid("quasi_phase", "array length mismatch"));
    }
    if n < 2 {
        return Err(Error::invalid("quasi_phase", "need at least two samples"));
    }

    let q_spline = CubicSpline::new(x_grid.to_vec(), q_samples.to_vec(), SplineEnds::Natural)?;

    let mut integrand = Vec::with_capacity(n);
    for i in 0..n {
        let w = w_samples[i];
        let wp = wprime_samples[i];
        let q = q_samples[i];
        let qw = w * q;
        let num = wp.re * qw.re + wp.im * qw.im; // Re(w' conj(q w))
        let denom_c = wp + Complex::new(-qw.im, qw.re); // w' + i q w
        let denom = denom_c.norm_sqr();

        // |y + i| = |w' + i q w| / |q w|; check the branch where w != 0.
        let qw_norm = qw.norm();
        if qw_norm > T::zero() {
            let y_plus_i = denom.sqrt() / qw_norm;
            if y_plus_i < T::of(1e-12) {
                return Err(Error::BranchFailure {
                    x: x_grid[i].to_f64().unwrap_or(f64::NAN),
                    value: y_plus_i.to_f64().unwrap_or(f64::NAN),
                    floor: 1e-12,
                });
            }
        } else if denom == T::zero() {
            return Err(Error::BranchFailure {
                x: x_grid[i].to_f64().unwrap_or(f64::NAN),
                value: 0.0,
                floor: 1e-12,
            });
        }

        let (_, qp) = q_spline.eval_with_derivative(x_grid[i]);
        integrand.push(q + qp / q * num / denom);
    }

    let spline = CubicSpline::new(x_grid.to_vec(), integrand, SplineEnds::Natural)?;
    Ok(spline.cumulative_integral())
}
