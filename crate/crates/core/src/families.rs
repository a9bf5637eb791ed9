//! Integrable potential families M(C).
//!
//! Choosing Gdot = d ln M / dC turns the C-equation into a one-degree-of-
//! freedom system with the energy integral
//!
//! ```text
//! Cdot^2 = 1 - 4 C^2 + M(C)
//! ```
//!
//! so C(psi) oscillates between the adjacent simple roots of the radicand
//! R(C) = 1 - 4C^2 + M(C) (the turning points), with psi-period tau given by
//! a turning-point quadrature. Five closed-form families (constant, linear,
//! both quadratic signs, quartic/elliptic) plus user-tabulated potentials are
//! supported.
//!
//! The complex increment per period, ln W(psi+tau)/W(psi) = chi + i eta, is
//! a single merged turning-point quadrature; for even M the real part chi
//! vanishes and |W| is periodic (transmission band).

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::complexband::{admittance_from_c, CFunction};
use crate::error::{Error, Result};
use crate::numerics::elliptic::{elliptic_k, jacobi_sncndn};
use crate::numerics::interp::{CubicSpline, Pchip, SplineEnds};
use crate::numerics::ode::{ode_solve, OdeOptions};
use crate::numerics::quad::gl5_rule;
use crate::numerics::turning::{quad_turning, quad_turning_upper};
use crate::real::Real;
use crate::realband::{BandMetrics, CurveOptions, ParametricCurve};

/// Margin around the excluded parameter values (c = 0, 4a^2 = 1).
const C_EXCLUSION: f64 = 1e-6;
/// Orbits on which min |M| falls below this are rejected (Gdot = M'/M pole).
const M_FLOOR: f64 = 1e-9;

/// Branch sign for closed forms and orbit construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn factor<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

/// Wire form of a potential: `{"variant": "quartic", "a": 0.4, "b": 1.0}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum FamilySpecRaw<T> {
    Constant { c: T },
    Linear { c: T, e: T },
    QuadraticMinus { c: T, e: T, d: T },
    QuadraticPlus { c: T, e: T, k: T },
    Quartic { a: T, b: T },
    Tabulated { c_samples: Vec<T>, m_samples: Vec<T> },
}

impl<T: Real> TryFrom<FamilySpecRaw<T>> for PotentialFamily<T> {
    type Error = Error;
    fn try_from(raw: FamilySpecRaw<T>) -> Result<Self> {
        match raw {
            FamilySpecRaw::Constant { c } => PotentialFamily::constant(c),
            FamilySpecRaw::Linear { c, e } => PotentialFamily::linear(c, e),
            FamilySpecRaw::QuadraticMinus { c, e, d } => PotentialFamily::quadratic_minus(c, e, d),
            FamilySpecRaw::QuadraticPlus { c, e, k } => PotentialFamily::quadratic_plus(c, e, k),
            FamilySpecRaw::Quartic { a, b } => PotentialFamily::quartic(a, b),
            FamilySpecRaw::Tabulated {
                c_samples,
                m_samples,
            } => PotentialFamily::tabulated(c_samples, m_samples),
        }
    }
}

impl<T: Real> From<&PotentialFamily<T>> for FamilySpecRaw<T> {
    fn from(f: &PotentialFamily<T>) -> Self {
        match f {
            PotentialFamily::Constant { c } => FamilySpecRaw::Constant { c: *c },
            PotentialFamily::Linear { c, e } => FamilySpecRaw::Linear { c: *c, e: *e },
            PotentialFamily::QuadraticMinus { c, e, d } => FamilySpecRaw::QuadraticMinus {
                c: *c,
                e: *e,
                d: *d,
            },
            PotentialFamily::QuadraticPlus { c, e, k } => FamilySpecRaw::QuadraticPlus {
                c: *c,
                e: *e,
                k: *k,
            },
            PotentialFamily::Quartic { a, b } => FamilySpecRaw::Quartic { a: *a, b: *b },
            PotentialFamily::Tabulated {
                c_samples,
                m_samples,
                ..
            } => FamilySpecRaw::Tabulated {
                c_samples: c_samples.clone(),
                m_samples: m_samples.clone(),
            },
        }
    }
}

impl<T: Real + Serialize> Serialize for PotentialFamily<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FamilySpecRaw::from(self).serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for PotentialFamily<T> {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let raw = FamilySpecRaw::<T>::deserialize(deserializer)?;
        PotentialFamily::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// A potential M(C). Closed-form variants carry their defining constants;
/// `Tabulated` interpolates user samples with a cubic spline (derivative
/// from the spline).
#[derive(Debug, Clone)]
pub enum PotentialFamily<T: Real> {
    Constant {
        c: T,
    },
    Linear {
        c: T,
        e: T,
    },
    QuadraticMinus {
        c: T,
        e: T,
        d: T,
    },
    QuadraticPlus {
        c: T,
        e: T,
        k: T,
    },
    Quartic {
        a: T,
        b: T,
    },
    Tabulated {
        c_samples: Vec<T>,
        m_samples: Vec<T>,
        spline: CubicSpline<T>,
    },
}

impl<T: Real> PotentialFamily<T> {
    pub fn constant(c: T) -> Result<Self> {
        if !(c > -T::one()) {
            return Err(Error::invalid("PotentialFamily", "need c > -1"));
        }
        check_c_nonzero(c)?;
        Ok(PotentialFamily::Constant { c })
    }

    pub fn linear(c: T, e: T) -> Result<Self> {
        if !(c > -T::one() - T::of(4.0) * e * e) {
            return Err(Error::invalid("PotentialFamily", "need c > -1 - 4e^2"));
        }
        check_c_nonzero(c)?;
        Ok(PotentialFamily::Linear { c, e })
    }

    pub fn quadratic_minus(c: T, e: T, d: T) -> Result<Self> {
        let bound = -T::one() - T::of(16.0) * e * e / (d * d + T::of(4.0));
        if !(c > bound) {
            return Err(Error::invalid(
                "PotentialFamily",
                "need c > -1 - 16e^2/(d^2+4)",
            ));
        }
        check_c_nonzero(c)?;
        Ok(PotentialFamily::QuadraticMinus { c, e, d })
    }

    pub fn quadratic_plus(c: T, e: T, k: T) -> Result<Self> {
        if !(k > T::zero()) {
            return Err(Error::invalid("PotentialFamily", "need k > 0"));
        }
        if !(c > -T::one() + T::of(16.0) * e * e / (k * k)) {
            return Err(Error::invalid(
                "PotentialFamily",
                "need c > -1 + 16e^2/k^2",
            ));
        }
        check_c_nonzero(c)?;
        Ok(PotentialFamily::QuadraticPlus { c, e, k })
    }

    pub fn quartic(a: T, b: T) -> Result<Self> {
        if !(a > T::zero()) || !(b > T::zero()) {
            return Err(Error::invalid("PotentialFamily", "need a, b > 0"));
        }
        if !(a * b < T::one()) {
            return Err(Error::invalid("PotentialFamily", "need a b < 1"));
        }
        if (T::of(4.0) * a * a - T::one()).abs() < T::of(C_EXCLUSION) {
            return Err(Error::invalid("PotentialFamily", "need 4a^2 != 1"));
        }
        Ok(PotentialFamily::Quartic { a, b })
    }

    pub fn tabulated(c_samples: Vec<T>, m_samples: Vec<T>) -> Result<Self> {
        if c_samples.len() < 4 {
            return Err(Error::invalid(
                "PotentialFamily",
                "tabulated potential needs at least 4 samples",
            ));
        }
        let spline = CubicSpline::new(c_samples.clone(), m_samples.clone(), SplineEnds::Natural)?;
        Ok(PotentialFamily::Tabulated {
            c_samples,
            m_samples,
            spline,
        })
    }

    /// M(C) and dM/dC.
    pub fn m_eval(&self, c_val: T) -> (T, T) {
        let four = T::of(4.0);
        let eight = T::of(8.0);
        match self {
            PotentialFamily::Constant { c } => (*c, T::zero()),
            PotentialFamily::Linear { c, e } => (*c + eight * *e * c_val, eight * *e),
            PotentialFamily::QuadraticMinus { c, e, d } => (
                *c + eight * *e * c_val - *d * *d * c_val * c_val,
                eight * *e - T::two() * *d * *d * c_val,
            ),
            PotentialFamily::QuadraticPlus { c, e, k } => {
                let kk4 = *k * *k + four;
                (
                    *c + eight * *e * c_val + kk4 * c_val * c_val,
                    eight * *e + T::two() * kk4 * c_val,
                )
            }
            PotentialFamily::Quartic { a, b } => {
                let b2 = *b * *b;
                (
                    four * *a * *a - T::one() + b2 * c_val.powi(4),
                    four * b2 * c_val.powi(3),
                )
            }
            PotentialFamily::Tabulated { spline, .. } => spline.eval_with_derivative(c_val),
        }
    }

    /// Radicand R(C) = 1 - 4 C^2 + M(C) of the energy integral.
    pub fn radicand(&self, c_val: T) -> T {
        let (m, _) = self.m_eval(c_val);
        T::one() - T::of(4.0) * c_val * c_val + m
    }

    fn radicand_derivative(&self, c_val: T) -> T {
        let (_, mp) = self.m_eval(c_val);
        -T::of(8.0) * c_val + mp
    }

    /// Center of the closed-form orbit (where the sinusoid/sn argument is 0).
    pub fn orbit_center(&self) -> T {
        let four = T::of(4.0);
        match self {
            PotentialFamily::Constant { .. } | PotentialFamily::Quartic { .. } => T::zero(),
            PotentialFamily::Linear { e, .. } => *e,
            PotentialFamily::QuadraticMinus { e, d, .. } => four * *e / (*d * *d + four),
            PotentialFamily::QuadraticPlus { e, k, .. } => -four * *e / (*k * *k),
            PotentialFamily::Tabulated { .. } => T::zero(),
        }
    }

    /// Whether M is an even function of C (chi vanishes, G periodic).
    pub fn is_even(&self) -> bool {
        match self {
            PotentialFamily::Constant { .. } | PotentialFamily::Quartic { .. } => true,
            PotentialFamily::Linear { e, .. }
            | PotentialFamily::QuadraticMinus { e, .. }
            | PotentialFamily::QuadraticPlus { e, .. } => *e == T::zero(),
            PotentialFamily::Tabulated {
                c_samples,
                m_samples,
                spline,
            } => {
                let lo = c_samples[0];
                let hi = c_samples[c_samples.len() - 1];
                if (lo + hi).abs() > T::of(1e-12) * (hi - lo) {
                    return false;
                }
                let scale = m_samples
                    .iter()
                    .fold(T::zero(), |a, v| a.max(v.abs()))
                    + T::of(1e-30);
                for i in 0..=64 {
                    let c = hi * T::of(i as f64 / 64.0);
                    if (spline.eval(c) - spline.eval(-c)).abs() > T::of(1e-9) * scale {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Elliptic modulus p of the quartic family's sn solution.
    pub fn quartic_modulus(&self) -> Option<T> {
        match self {
            PotentialFamily::Quartic { a, b } => {
                let ab = *a * *b;
                Some((T::one() - (T::one() - ab * ab).sqrt()) / ab)
            }
            _ => None,
        }
    }

    /// Exact psi-period of the closed-form orbit, when available.
    pub fn period_tau_exact(&self) -> Option<T> {
        match self {
            PotentialFamily::Constant { .. } | PotentialFamily::Linear { .. } => Some(T::PI()),
            PotentialFamily::QuadraticMinus { d, .. } => {
                Some(T::two() * T::PI() / (*d * *d + T::of(4.0)).sqrt())
            }
            PotentialFamily::Quartic { .. } => {
                let p = self.quartic_modulus()?;
                let scale = (T::one() + p * p).sqrt();
                elliptic_k(p).ok().map(|k| T::two() * scale * k)
            }
            _ => None,
        }
    }
}

fn check_c_nonzero<T: Real>(c: T) -> Result<()> {
    if c.abs() < T::of(C_EXCLUSION) {
        return Err(Error::invalid(
            "PotentialFamily",
            format!("|c| must be >= {C_EXCLUSION} (M must not vanish at the orbit center)"),
        ));
    }
    Ok(())
}

/// Closed-form C(psi) for the five analytic families (with derivatives).
/// Tabulated potentials have no closed form.
pub fn closed_form_c_full<T: Real>(
    family: &PotentialFamily<T>,
    branch: Sign,
    psi: T,
    psi0: T,
) -> Result<(T, T, T)> {
    let s: T = branch.factor();
    let theta = psi - psi0;
    match family {
        PotentialFamily::Constant { c } => {
            let amp = (T::one() + *c).sqrt() * T::half();
            Ok(sinusoid(T::zero(), amp, T::two(), s, theta))
        }
        PotentialFamily::Linear { c, e } => {
            let amp = (T::one() + *c + T::of(4.0) * *e * *e).sqrt() * T::half();
            Ok(sinusoid(*e, amp, T::two(), s, theta))
        }
        PotentialFamily::QuadraticMinus { c, e, d } => {
            let dd4 = *d * *d + T::of(4.0);
            let amp = ((T::one() + *c) * dd4 + T::of(16.0) * *e * *e).sqrt() / dd4;
            Ok(sinusoid(T::of(4.0) * *e / dd4, amp, dd4.sqrt(), s, theta))
        }
        PotentialFamily::QuadraticPlus { c, e, k } => {
            let kk = *k * *k;
            let amp = ((T::one() + *c) * kk - T::of(16.0) * *e * *e).sqrt() / kk;
            let (sh, ch) = ((*k * theta).sinh(), (*k * theta).cosh());
            let center = -T::of(4.0) * *e / kk;
            Ok((
                center + s * amp * sh,
                s * amp * *k * ch,
                s * amp * kk * sh,
            ))
        }
        PotentialFamily::Quartic { a, b: _ } => {
            let p = family.quartic_modulus().expect("quartic");
            let scale = (T::one() + p * p).sqrt();
            let u = T::two() * theta / scale;
            let jac = jacobi_sncndn(u, p);
            let amp = *a * scale;
            let c = s * amp * jac.sn;
            let cdot = s * T::two() * *a * jac.cn * jac.dn;
            let cddot = -s * T::of(4.0) * *a / scale
                * jac.sn
                * (jac.dn * jac.dn + p * p * jac.cn * jac.cn);
            Ok((c, cdot, cddot))
        }
        PotentialFamily::Tabulated { .. } => Err(Error::NoClosedForm),
    }
}

fn sinusoid<T: Real>(center: T, amp: T, omega: T, s: T, theta: T) -> (T, T, T) {
    let (sn, cs) = (omega * theta).sin_cos();
    (
        center + s * amp * sn,
        s * amp * omega * cs,
        -s * amp * omega * omega * sn,
    )
}

/// Closed-form C(psi) value only.
pub fn closed_form_c<T: Real>(
    family: &PotentialFamily<T>,
    branch: Sign,
    psi: T,
    psi0: T,
) -> Result<T> {
    closed_form_c_full(family, branch, psi, psi0).map(|(c, _, _)| c)
}

/// The two adjacent simple roots of the radicand bracketing `c_start`
/// (outward scan, bisection, Newton polish to |R| <= 1e-12).
pub fn turning_points<T: Real>(family: &PotentialFamily<T>, c_start: T) -> Result<(T, T)> {
    if !(family.radicand(c_start) > T::zero()) {
        return Err(Error::invalid(
            "turning_points",
            "radicand must be positive at the starting point",
        ));
    }
    let upper = scan_root(family, c_start, T::one())?;
    let lower = scan_root(family, c_start, -T::one())?;
    Ok((lower, upper))
}

// Outward march with growing steps, then bisection and Newton polish.
// Assumes the radicand's sign wells are wider than the initial step
// (1e-4 of the local scale), which holds across the supported families.
fn scan_root<T: Real>(family: &PotentialFamily<T>, c_start: T, dir: T) -> Result<T> {
    let scale = T::one() + c_start.abs();
    let mut step = T::of(1e-4) * scale;
    let step_cap = T::of(0.1) * scale;
    let mut a = c_start;
    let mut ra = family.radicand(a);
    let c_max = T::of(1e6);
    loop {
        let b = a + dir * step;
        let rb = family.radicand(b);
        if !(rb > T::zero()) {
            // Bisection.
            let (mut lo, mut hi) = (a, b);
            let mut r_lo = ra;
            for _ in 0..200 {
                let mid = (lo + hi) * T::half();
                if mid == lo || mid == hi {
                    break;
                }
                let rm = family.radicand(mid);
                if rm > T::zero() {
                    lo = mid;
                    r_lo = rm;
                } else {
                    hi = mid;
                }
            }
            let _ = r_lo;
            // Newton polish.
            let mut root = (lo + hi) * T::half();
            for _ in 0..8 {
                let r = family.radicand(root);
                let rp = family.radicand_derivative(root);
                if rp == T::zero() {
                    break;
                }
                root = root - r / rp;
            }
            let r_final = family.radicand(root);
            if r_final.abs() > T::of(1e-12) {
                return Err(Error::NotSimpleRoot {
                    c: root.to_f64().unwrap_or(f64::NAN),
                    deriv: family
                        .radicand_derivative(root)
                        .abs()
                        .to_f64()
                        .unwrap_or(f64::NAN),
                });
            }
            return Ok(root);
        }
        a = b;
        ra = rb;
        step = (step * T::of(1.25)).min(step_cap);
        if a.abs() > c_max {
            return Err(Error::NoBoundedOrbit {
                side: if dir > T::zero() { "upper" } else { "lower" },
            });
        }
    }
}

/// Reject orbits on which M vanishes (Gdot = M'/M singular). Returns the
/// minimum of |M| over the orbit.
fn check_m_on_orbit<T: Real>(family: &PotentialFamily<T>, c_lo: T, c_hi: T) -> Result<T> {
    let mut min_abs = T::infinity();
    let mut prev_sign = T::zero();
    let n = 2000;
    for i in 0..=n {
        let c = c_lo + (c_hi - c_lo) * T::of(i as f64 / n as f64);
        let (m, _) = family.m_eval(c);
        min_abs = min_abs.min(m.abs());
        let sign = m.signum();
        if prev_sign != T::zero() && sign != prev_sign {
            return Err(Error::MVanishes {
                c: c.to_f64().unwrap_or(f64::NAN),
            });
        }
        prev_sign = sign;
    }
    if min_abs < T::of(M_FLOOR) {
        return Err(Error::MVanishes {
            c: ((c_lo + c_hi) * T::half()).to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(min_abs)
}

/// psi-period of the orbit: tau = 2 int_{C-}^{C+} dC / sqrt(R), by
/// turning-point quadrature (cross-check against `period_tau_exact`).
pub fn period_tau<T: Real>(family: &PotentialFamily<T>, tol: T) -> Result<T> {
    let center = family.orbit_center();
    let (c_lo, c_hi) = turning_points(family, center)?;
    let r = quad_turning(|_, _| T::one(), |c| family.radicand(c), c_lo, c_hi, tol)?
        .require_converged(tol)?;
    Ok(T::two() * r.value)
}

/// Complex increment per period, ln[W(psi+tau)/W(psi)] = chi + i eta:
/// the merged two-leg quadrature
///
/// ```text
/// 2 int_{C-}^{C+} (2+M)/(M^2+16C^2) {4C/M - i} (M - C M') dC / sqrt(R)
/// ```
pub fn complex_increment<T: Real>(family: &PotentialFamily<T>, tol: T) -> Result<(T, T)> {
    let center = family.orbit_center();
    let (c_lo, c_hi) = turning_points(family, center)?;
    check_m_on_orbit(family, c_lo, c_hi)?;

    let g = |c: T, _sqrt_r: T| -> Complex<T> {
        let (m, mp) = family.m_eval(c);
        let four = T::of(4.0);
        let front = (T::two() + m) / (m * m + T::of(16.0) * c * c) * (m - c * mp);
        Complex::new(front * four * c / m, -front)
    };
    let r = quad_turning(g, |c| family.radicand(c), c_lo, c_hi, tol)?.require_converged(tol)?;
    Ok((T::two() * r.value.re, T::two() * r.value.im))
}

/// Phase advance per period for even potentials (the increment reduced to a
/// half-orbit integral by symmetry):
///
/// ```text
/// eta = 4 int_0^{C+} (2+M)/(M^2+16C^2) (C M' - M) dC / sqrt(R)
/// ```
pub fn eta_even<T: Real>(family: &PotentialFamily<T>, tol: T) -> Result<T> {
    if !family.is_even() {
        return Err(Error::NotEven);
    }
    let (c_lo, c_hi) = turning_points(family, family.orbit_center())?;
    check_m_on_orbit(family, c_lo, c_hi)?;

    let g = |c: T, _sqrt_r: T| -> T {
        let (m, mp) = family.m_eval(c);
        (T::two() + m) / (m * m + T::of(16.0) * c * c) * (c * mp - m)
    };
    let r = quad_turning_upper(g, |c| family.radicand(c), T::zero(), c_hi, tol)?
        .require_converged(tol)?;
    Ok(T::of(4.0) * r.value)
}

/// Modulation period T = (2 pi / eta) tau of the quasi-periodic envelope.
pub fn modulation_period<T: Real>(eta: T, tau: T) -> Result<T> {
    if eta == T::zero() {
        return Err(Error::ZeroEta);
    }
    Ok(T::two() * T::PI() / eta * tau)
}

/// One orbit of a family in psi space: C(psi) densely evaluable, the
/// recovered modulation G(psi) (periodic for even M, drifting by `delta_g`
/// per period otherwise), and the orbit constants.
///
/// The orbit starts at the center (C = orbit_center, branch sign fixes the
/// initial Cdot sign) so the closed forms apply verbatim.
pub struct FamilyOrbit<T: Real> {
    family: PotentialFamily<T>,
    branch: Sign,
    psi0: T,
    q0: T,
    tau: T,
    c_lo: T,
    c_hi: T,
    delta_g: T,
    g_interp: Pchip<T>,
    /// Dense C evaluator for tabulated potentials (closed forms otherwise).
    numeric_c: Option<crate::numerics::ode::OdeTrajectory<T, 2>>,
}

impl<T: Real> std::fmt::Debug for FamilyOrbit<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FamilyOrbit")
            .field("tau", &self.tau)
            .field("c_lo", &self.c_lo)
            .field("c_hi", &self.c_hi)
            .field("delta_g", &self.delta_g)
            .finish()
    }
}

/// Samples per orbit period used for the G interpolant.
const ORBIT_NODES: usize = 4096;

impl<T: Real> FamilyOrbit<T> {
    pub fn new(family: PotentialFamily<T>, branch: Sign, psi0: T, q0: T) -> Result<Self> {
        let center = family.orbit_center();
        let (c_lo, c_hi) = turning_points(&family, center)?;
        check_m_on_orbit(&family, c_lo, c_hi)?;
        let tau = match family.period_tau_exact() {
            Some(t) => t,
            None => period_tau(&family, T::of(1e-12))?,
        };

        // Dense C(psi) for tabulated potentials: integrate the energy-ODE
        // Cddot = -4C + M'/2 over one period.
        let numeric_c = match &family {
            PotentialFamily::Tabulated { .. } => {
                let r0 = family.radicand(center);
                let cdot0: T = branch.factor::<T>() * r0.max(T::zero()).sqrt();
                let opts = OdeOptions {
                    h_max: Some(tau / T::of(512.0)),
                    ..OdeOptions::with_tol(T::of(1e-12))
                };
                let fam = family.clone();
                Some(ode_solve(
                    move |_psi, y: &[T; 2]| {
                        let (_, mp) = fam.m_eval(y[0]);
                        [y[1], -T::of(4.0) * y[0] + mp * T::half()]
                    },
                    (psi0, psi0 + tau),
                    [center, cdot0],
                    &opts,
                )?)
            }
            _ => None,
        };

        let mut orbit = FamilyOrbit {
            family,
            branch,
            psi0,
            q0,
            tau,
            c_lo,
            c_hi,
            delta_g: T::zero(),
            g_interp: Pchip::new(vec![T::zero(), T::one()], vec![T::zero(), T::zero()])?,
            numeric_c,
        };

        // Cumulative G over one period: G' = M'(C)/M(C) along the orbit.
        let n = ORBIT_NODES;
        let grid: Vec<T> = (0..=n)
            .map(|i| psi0 + tau * T::of(i as f64 / n as f64))
            .collect();
        let g = crate::numerics::quad::cumulative_gl5(|p| orbit.gdot_at(p), &grid);
        let delta_g = g[n];
        orbit.delta_g = if orbit.family.is_even() && delta_g.abs() < T::of(1e-9) {
            T::zero()
        } else {
            delta_g
        };
        orbit.g_interp = Pchip::new(grid, g)?;
        Ok(orbit)
    }

    pub fn family(&self) -> &PotentialFamily<T> {
        &self.family
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn turning_pair(&self) -> (T, T) {
        (self.c_lo, self.c_hi)
    }

    /// G drift per period (zero for even potentials).
    pub fn delta_g(&self) -> T {
        self.delta_g
    }

    pub fn psi0(&self) -> T {
        self.psi0
    }

    /// C and derivatives at psi (closed form, or dense ODE trajectory for
    /// tabulated potentials, extended periodically).
    pub fn c_at(&self, psi: T) -> (T, T, T) {
        match &self.numeric_c {
            None => closed_form_c_full(&self.family, self.branch, psi, self.psi0)
                .expect("closed form exists for analytic families"),
            Some(traj) => {
                let mut t = psi - self.psi0;
                let per = self.tau;
                t = t - (t / per).floor() * per;
                let (y, dy) = traj.eval_with_derivative(self.psi0 + t);
                (y[0], y[1], dy[1])
            }
        }
    }

    fn gdot_at(&self, psi: T) -> T {
        let (c, _, _) = self.c_at(psi);
        let (m, mp) = self.family.m_eval(c);
        mp / m
    }

    /// A `CFunction` view of this orbit over `n_periods` periods
    /// (`nodes_per_period + 1` samples per period).
    pub fn cfunction(&self, n_periods: usize, nodes_per_period: usize) -> Result<CFunction<T>> {
        let n = nodes_per_period.max(2) * n_periods.max(1);
        let span = self.tau * T::of(n_periods.max(1) as f64);
        let grid: Vec<T> = (0..=n)
            .map(|i| self.psi0 + span * T::of(i as f64 / n as f64))
            .collect();
        match &self.family {
            PotentialFamily::Tabulated { .. } => {
                // Sampled closure wrapping the periodic trajectory.
                let traj = self
                    .numeric_c
                    .clone()
                    .expect("tabulated orbit carries a trajectory");
                let psi0 = self.psi0;
                let per = self.tau;
                CFunction::from_fn(grid, move |psi: T| {
                    let mut t = psi - psi0;
                    t = t - (t / per).floor() * per;
                    let (y, dy) = traj.eval_with_derivative(psi0 + t);
                    (y[0], y[1], dy[1])
                })
            }
            _ => {
                let fam = self.family.clone();
                let branch = self.branch;
                let psi0 = self.psi0;
                CFunction::from_fn(grid, move |psi: T| {
                    closed_form_c_full(&fam, branch, psi, psi0).expect("analytic family")
                })
            }
        }
    }
}

impl<T: Real> crate::profile::Modulation<T> for FamilyOrbit<T> {
    fn q0(&self) -> T {
        self.q0
    }

    fn eval_g(&self, psi: T) -> (T, T) {
        let t = psi - self.psi0;
        let k = (t / self.tau).floor();
        let wrapped = self.psi0 + (t - k * self.tau);
        let g = self.g_interp.eval(wrapped) + k * self.delta_g;
        (g, self.gdot_at(psi))
    }
}

/// Sampled modulation of a family orbit: G and Gdot on a uniform psi grid
/// over one period, G(psi0) = 0. For even potentials G is tau-periodic;
/// otherwise it drifts by [`FamilyOrbit::delta_g`] per period.
pub fn g_of_psi_family<T: Real>(
    family: &PotentialFamily<T>,
    branch: Sign,
    psi0: T,
    nodes: usize,
) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let orbit = FamilyOrbit::new(family.clone(), branch, psi0, T::one())?;
    let n = nodes.max(2);
    let tau = orbit.tau();
    let mut psi = Vec::with_capacity(n + 1);
    let mut g = Vec::with_capacity(n + 1);
    let mut gdot = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let p = psi0 + tau * T::of(i as f64 / n as f64);
        let (gv, gd) = crate::profile::Modulation::eval_g(&orbit, p);
        psi.push(p);
        g.push(gv);
        gdot.push(gd);
    }
    Ok((psi, g, gdot))
}

/// Result of the two-leg wave accumulation.
#[derive(Debug)]
pub struct WaveFromPotential<T: Real> {
    pub curve: ParametricCurve<T>,
    /// ln W(psi + tau) / W(psi) over the first period.
    pub ln_w_per_period: Complex<T>,
    pub tau: T,
}

/// Accumulate W over `n_periods` orbits by the alternating branch rule:
/// "+" from C- to C+, "-" back. This is the two-leg form of the increment;
/// its per-period total must match [`complex_increment`] (merged form).
///
/// The curve starts at psi0 with C = C- (the lower turning point).
pub fn w_from_m<T: Real>(
    family: &PotentialFamily<T>,
    n_periods: usize,
    q0: T,
    opts: CurveOptions<T>,
) -> Result<WaveFromPotential<T>> {
    let center = family.orbit_center();
    let (c_lo, c_hi) = turning_points(family, center)?;
    check_m_on_orbit(family, c_lo, c_hi)?;
    let tau = match family.period_tau_exact() {
        Some(t) => t,
        None => period_tau(family, T::of(1e-12))?,
    };

    let psi0 = T::zero();
    if n_periods == 0 {
        let y = admittance_from_c(c_lo, T::zero())?.y;
        let curve = ParametricCurve::new(
            vec![psi0],
            vec![opts.x0],
            vec![opts.w0],
            vec![y],
            opts.w0,
            opts.x0,
            psi0,
            Some(tau),
        )?;
        return Ok(WaveFromPotential {
            curve,
            ln_w_per_period: Complex::new(T::zero(), T::zero()),
            tau,
        });
    }

    // Each leg is parametrized by theta in [-pi/2, pi/2]:
    //   leg "+": C = mid + half sin(theta), Cdot = +sqrt(R)
    //   leg "-": C = mid - half sin(theta), Cdot = -sqrt(R)
    // so dpsi/dtheta = half cos(theta)/sqrt(R) > 0 on both. Everything is
    // accumulated cumulatively in theta with a GL5 panel per cell; G at the
    // in-cell nodes comes from a nested sub-segment pass so Q = q0 exp(G) is
    // available for the X integrand.
    let cells_per_leg = 384usize;
    let mid = (c_lo + c_hi) * T::half();
    let half = (c_hi - c_lo) * T::half();
    let (gl_nodes, gl_weights) = gl5_rule::<T>();

    let mut psi = psi0;
    let mut g = T::zero();
    let mut x = opts.x0;
    let mut lnw = Complex::new(T::zero(), T::zero());
    let mut ln_w_first_period = Complex::new(T::zero(), T::zero());

    let mut psis = vec![psi];
    let mut xs = vec![x];
    let mut ws = vec![opts.w0];
    let mut ys = vec![admittance_from_c(c_lo, T::zero())?.y];

    let half_pi = T::FRAC_PI_2();
    let dtheta = T::PI() / T::of(cells_per_leg as f64);

    for period in 0..n_periods {
        for leg in 0..2 {
            let sgn: T = if leg == 0 { T::one() } else { -T::one() };
            for cell in 0..cells_per_leg {
                let th0 = -half_pi + dtheta * T::of(cell as f64);
                let th_c = th0 + dtheta * T::half();

                // G at the GL nodes, cumulative from the cell start.
                let mut g_nodes = [T::zero(); 5];
                {
                    let mut acc_g = g;
                    let mut prev_th = th0;
                    for (i, gn) in gl_nodes.iter().enumerate() {
                        let th = th_c + dtheta * T::half() * *gn;
                        let (_, dg) = segment_integral(
                            family, mid, half, sgn, prev_th, th, &gl_nodes, &gl_weights,
                        );
                        acc_g = acc_g + dg;
                        g_nodes[i] = acc_g;
                        prev_th = th;
                    }
                }

                // Cell increments: GL5 in theta.
                let mut dpsi_cell = T::zero();
                let mut dx_cell = T::zero();
                let mut dlnw_cell = Complex::new(T::zero(), T::zero());
                for (i, (gn, wgt)) in gl_nodes.iter().zip(gl_weights.iter()).enumerate() {
                    let th = th_c + dtheta * T::half() * *gn;
                    let c = mid + sgn * half * th.sin();
                    let r = family.radicand(c).max(T::min_positive_value());
                    let sqrt_r = r.sqrt();
                    let (m, mp) = family.m_eval(c);
                    let dpsi_dth = half * th.cos() / sqrt_r;
                    let one_minus = T::one() - mp / m * c;
                    let q = q0 * g_nodes[i].exp();
                    let cdot = if leg == 0 { sqrt_r } else { -sqrt_r };
                    let y = admittance_from_c(c, cdot)
                        .expect("pole excluded by the c != 0 family constraints")
                        .y;
                    let scale = dtheta * T::half() * *wgt;
                    dpsi_cell = dpsi_cell + dpsi_dth * scale;
                    dx_cell = dx_cell + one_minus / q * dpsi_dth * scale;
                    dlnw_cell = dlnw_cell + y * (one_minus * dpsi_dth * scale);
                }
                let (_, dg_cell) = segment_integral(
                    family,
                    mid,
                    half,
                    sgn,
                    th0,
                    th0 + dtheta,
                    &gl_nodes,
                    &gl_weights,
                );

                psi = psi + dpsi_cell;
                x = x + dx_cell;
                lnw = lnw + dlnw_cell;
                g = g + dg_cell;

                let th_end = th0 + dtheta;
                let c_end = mid + sgn * half * th_end.sin();
                let r_end = family.radicand(c_end).max(T::zero());
                let cdot_end = if leg == 0 {
                    r_end.sqrt()
                } else {
                    -r_end.sqrt()
                };
                psis.push(psi);
                xs.push(x);
                ws.push(opts.w0 * lnw.exp());
                ys.push(admittance_from_c(c_end, cdot_end)?.y);
            }
        }
        if period == 0 {
            ln_w_first_period = lnw;
        }
    }

    let curve = ParametricCurve::new(psis, xs, ws, ys, opts.w0, opts.x0, psi0, Some(tau))?;
    Ok(WaveFromPotential {
        curve,
        ln_w_per_period: ln_w_first_period,
        tau,
    })
}

/// GL5 integral of (dpsi/dtheta, dG/dtheta) over [th_a, th_b] on one leg.
#[allow(clippy::too_many_arguments)]
fn segment_integral<T: Real>(
    family: &PotentialFamily<T>,
    mid: T,
    half: T,
    sgn: T,
    th_a: T,
    th_b: T,
    gl_nodes: &[T; 5],
    gl_weights: &[T; 5],
) -> (T, T) {
    let c0 = (th_a + th_b) * T::half();
    let hw = (th_b - th_a) * T::half();
    let mut dpsi = T::zero();
    let mut dg = T::zero();
    for (gn, wgt) in gl_nodes.iter().zip(gl_weights.iter()) {
        let th = c0 + hw * *gn;
        let c = mid + sgn * half * th.sin();
        let r = family.radicand(c).max(T::min_positive_value());
        let dp = half * th.cos() / r.sqrt();
        let (m, mp) = family.m_eval(c);
        dpsi = dpsi + dp * *wgt;
        dg = dg + mp / m * dp * *wgt;
    }
    (dpsi * hw, dg * hw)
}

/// Band metrics of a family orbit: tau, the complex increment, the phase
/// advance, the modulation period, and the spatial period / characteristic
/// exponent of the reconstructed medium.
pub fn family_band_metrics<T: Real>(
    family: &PotentialFamily<T>,
    q0: T,
    tol: T,
) -> Result<BandMetrics<T>> {
    let tau = match family.period_tau_exact() {
        Some(t) => t,
        None => period_tau(family, tol)?,
    };
    let (chi_inc, eta) = complex_increment(family, tol)?;
    let t_modulation = if eta == T::zero() {
        T::infinity()
    } else {
        T::two() * T::PI() / eta * tau
    };

    // Spatial period from the orbit curve.
    let orbit = FamilyOrbit::new(family.clone(), Sign::Plus, T::zero(), q0)?;
    let cfun = orbit.cfunction(1, 2048)?;
    let curve = crate::complexband::parametric_from_c(
        &orbit,
        &cfun,
        CurveOptions::default(),
        Some(tau),
    )?;
    let spatial_period = curve.x()[curve.len() - 1] - curve.x()[0];

    Ok(BandMetrics {
        spatial_period,
        nu: -chi_inc,
        eta,
        increment_real: chi_inc,
        tau,
        t_modulation,
        mu: Complex::new(chi_inc / spatial_period, eta / spatial_period),
    })
}
