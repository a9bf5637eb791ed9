//! Quadrature of integrals with inverse-square-root endpoint singularities,
//! `int g(c) / sqrt(R(c)) dc`, where the radicand R has simple zeros at the
//! endpoints (turning points of a bounded orbit).
//!
//! The two-sided rule substitutes `c = m + h sin(theta)`; the factor
//! `h cos(theta) / sqrt(R)` then tends to a finite limit at the ends, so the
//! transformed integrand is smooth and ordinary adaptive panels apply. The
//! one-sided rule (singularity at the upper end only) uses `c = c_hi - s^2`.

use super::quad::{quad_adaptive, QuadValue, QuadratureResult};
use crate::error::{Error, Result};
use crate::real::Real;

const SIMPLE_ROOT_FLOOR: f64 = 1e-10;

fn check_simple_root<T: Real>(radicand: &impl Fn(T) -> T, c: T, span: T, inward: T) -> Result<()> {
    // One-sided secant just inside the interval. A double root makes the
    // secant scale with h (it estimates R'' h / 2, not R'), so compare
    // against a curvature-aware floor as well as the absolute one.
    let h = span * T::of(1e-7);
    let r0 = radicand(c);
    let r1 = radicand(c + inward * h);
    let r2 = radicand(c + inward * (h + h));
    let d = (r1 - r0) / (inward * h);
    let curv = (r2 - r1 - r1 + r0) / (h * h);
    let floor = T::of(SIMPLE_ROOT_FLOOR) + T::of(4.0) * curv.abs() * h;
    if d.abs() < floor {
        return Err(Error::NotSimpleRoot {
            c: c.to_f64().unwrap_or(f64::NAN),
            deriv: d.abs().to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Integrate `g(c, sqrt(R(c))) / sqrt(R(c))` over [c_lo, c_hi] where both
/// endpoints are simple roots of the radicand. `g` receives the already
/// computed `sqrt(R)` so integrands that contain it stay cheap and stable.
pub fn quad_turning<T: Real, V: QuadValue<T>>(
    g: impl Fn(T, T) -> V,
    radicand: impl Fn(T) -> T,
    c_lo: T,
    c_hi: T,
    tol: T,
) -> Result<QuadratureResult<V, T>> {
    if !(c_lo < c_hi) {
        return Err(Error::invalid("turning quadrature", "c_lo must be < c_hi"));
    }
    let span = c_hi - c_lo;
    check_simple_root(&radicand, c_lo, span, T::one())?;
    check_simple_root(&radicand, c_hi, span, -T::one())?;

    let mid = (c_lo + c_hi) * T::half();
    let half = span * T::half();
    let half_pi = T::FRAC_PI_2();

    let integrand = |theta: T| {
        let (s, cth) = theta.sin_cos();
        let c = mid + half * s;
        let r = radicand(c).max(T::min_positive_value());
        let sqrt_r = r.sqrt();
        g(c, sqrt_r).scale(half * cth / sqrt_r)
    };

    Ok(quad_adaptive(integrand, -half_pi, half_pi, tol))
}

/// Integrate `g(c, sqrt(R(c))) / sqrt(R(c))` over [c_lo, c_root] where only
/// the upper endpoint is a simple root of the radicand.
pub fn quad_turning_upper<T: Real, V: QuadValue<T>>(
    g: impl Fn(T, T) -> V,
    radicand: impl Fn(T) -> T,
    c_lo: T,
    c_root: T,
    tol: T,
) -> Result<QuadratureResult<V, T>> {
    if !(c_lo < c_root) {
        return Err(Error::invalid("turning quadrature", "c_lo must be < c_root"));
    }
    let span = c_root - c_lo;
    check_simple_root(&radicand, c_root, span, -T::one())?;

    let s_max = span.sqrt();
    let integrand = |s: T| {
        let c = c_root - s * s;
        let r = radicand(c).max(T::min_positive_value());
        let sqrt_r = r.sqrt();
        g(c, sqrt_r).scale(T::two() * s / sqrt_r)
    };

    Ok(quad_adaptive(integrand, T::zero(), s_max, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn arcsine_integral() {
        // int_{-1/2}^{1/2} dc / sqrt(1 - 4c^2) = pi/2
        let r = quad_turning(|_, _| 1.0f64, |c: f64| 1.0 - 4.0 * c * c, -0.5, 0.5, 1e-12)
            .unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-12, "got {}", r.value);
    }

    #[test]
    fn arcsine_scaling_independent_of_offset() {
        // int dc / sqrt(1 + c - 4C^2) over its roots = pi/2 for any c > -1
        for &c in &[0.5, 3.0, 10.0, -0.9] {
            let a = (1.0f64 + c).sqrt() / 2.0;
            let r = quad_turning(
                |_, _| 1.0f64,
                |x: f64| 1.0 + c - 4.0 * x * x,
                -a,
                a,
                1e-12,
            )
            .unwrap();
            assert!((r.value - PI / 2.0).abs() < 1e-11, "c={c}: got {}", r.value);
        }
    }

    #[test]
    fn weighted_moment() {
        // int_{-1/2}^{1/2} c^2 / sqrt(1 - 4c^2) dc = pi/16
        let r = quad_turning(
            |c: f64, _| c * c,
            |c: f64| 1.0 - 4.0 * c * c,
            -0.5,
            0.5,
            1e-13,
        )
        .unwrap();
        assert!((r.value - PI / 16.0).abs() < 1e-13);
    }

    #[test]
    fn double_root_rejected() {
        // R = (1 - 2c)^2 has a double root at 1/2.
        let err = quad_turning(
            |_, _| 1.0f64,
            |c: f64| (1.0 - 2.0 * c).powi(2),
            -0.5,
            0.5,
            1e-10,
        );
        assert!(matches!(err, Err(Error::NotSimpleRoot { .. })));
    }

    #[test]
    fn one_sided_half_arcsine() {
        // int_0^{1/2} dc / sqrt(1 - 4c^2) = pi/4
        let r = quad_turning_upper(|_, _| 1.0f64, |c: f64| 1.0 - 4.0 * c * c, 0.0, 0.5, 1e-12)
            .unwrap();
        assert!((r.value - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn one_sided_matches_two_sided_on_even_integrand() {
        let g = |c: f64, _: f64| (1.0 + c * c).ln() + 2.0;
        let rad = |c: f64| 2.0 - 4.0 * c * c;
        let a = (0.5f64).sqrt();
        let full = quad_turning(g, rad, -a, a, 1e-12).unwrap().value;
        let half = quad_turning_upper(g, rad, 0.0, a, 1e-12).unwrap().value;
        assert!((full - 2.0 * half).abs() < 1e-11);
    }
}
