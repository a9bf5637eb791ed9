//! 1-D interpolation: monotone cubic (Fritsch–Carlson / PCHIP) for
//! inversions that must preserve monotonicity, and C2 cubic splines
//! (natural or periodic ends) where a smooth derivative matters.

use crate::error::{Error, Result};
use crate::real::Real;

fn check_increasing<T: Real>(x: &[T]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::invalid("interpolant", "need at least two nodes"));
    }
    for (i, w) in x.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::invalid(
                "interpolant",
                format!("abscissae not strictly increasing at index {}", i + 1),
            ));
        }
    }
    Ok(())
}

fn locate<T: Real>(x: &[T], xv: T) -> usize {
    match x.binary_search_by(|probe| probe.partial_cmp(&xv).expect("finite abscissa")) {
        Ok(i) => i.min(x.len() - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(x.len() - 2),
    }
}

/// Monotone piecewise-cubic Hermite interpolant (PCHIP).
///
/// For strictly monotone data the interpolant is strictly monotone, which is
/// what the x = X(psi) inversion relies on.
#[derive(Debug, Clone)]
pub struct Pchip<T> {
    x: Vec<T>,
    y: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> Pchip<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        check_increasing(&x)?;
        if x.len() != y.len() {
            return Err(Error::invalid("interpolant", "length mismatch"));
        }
        let n = x.len();
        let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<T> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

        let mut d = vec![T::zero(); n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                let (dl, dr) = (delta[i - 1], delta[i]);
                if dl == T::zero() || dr == T::zero() || (dl > T::zero()) != (dr > T::zero()) {
                    d[i] = T::zero();
                } else {
                    let w1 = T::two() * h[i] + h[i - 1];
                    let w2 = h[i] + T::two() * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / dl + w2 / dr);
                }
            }
            d[0] = edge_derivative(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = edge_derivative(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Pchip { x, y, d })
    }

    pub fn domain(&self) -> (T, T) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn eval(&self, xv: T) -> T {
        self.eval_with_derivative(xv).0
    }

    pub fn eval_with_derivative(&self, xv: T) -> (T, T) {
        let i = locate(&self.x, xv);
        let h = self.x[i + 1] - self.x[i];
        let s = (xv - self.x[i]) / h;

        let h00 = (T::one() + T::two() * s) * (T::one() - s) * (T::one() - s);
        let h10 = s * (T::one() - s) * (T::one() - s);
        let h01 = s * s * (T::of(3.0) - T::two() * s);
        let h11 = s * s * (s - T::one());
        let v = h00 * self.y[i]
            + h10 * h * self.d[i]
            + h01 * self.y[i + 1]
            + h11 * h * self.d[i + 1];

        let d00 = T::of(6.0) * s * (s - T::one());
        let d10 = (T::one() - s) * (T::one() - T::of(3.0) * s);
        let d11 = s * (T::of(3.0) * s - T::two());
        let dv = (d00 * (self.y[i] - self.y[i + 1])) / h + d10 * self.d[i] + d11 * self.d[i + 1];
        (v, dv)
    }
}

fn edge_derivative<T: Real>(h0: T, h1: T, d0: T, d1: T) -> T {
    // Shape-preserving three-point end slope (Fritsch–Carlson).
    let d = ((T::two() * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= T::zero() {
        T::zero()
    } else if d0 * d1 <= T::zero() && d.abs() > T::of(3.0) * d0.abs() {
        T::of(3.0) * d0
    } else {
        d
    }
}

/// End conditions for [`CubicSpline`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplineEnds {
    /// Second derivative zero at both ends.
    Natural,
    /// Periodic closure: requires `y[last] == y[first]`; the interpolant and
    /// its first two derivatives match across the wrap.
    Periodic,
}

/// C2 cubic spline through the nodes.
#[derive(Debug, Clone)]
pub struct CubicSpline<T> {
    x: Vec<T>,
    y: Vec<T>,
    /// Second derivatives at the nodes.
    m: Vec<T>,
}

impl<T: Real> CubicSpline<T> {
    pub fn new(x: Vec<T>, y: Vec<T>, ends: SplineEnds) -> Result<Self> {
        check_increasing(&x)?;
        if x.len() != y.len() {
            return Err(Error::invalid("interpolant", "length mismatch"));
        }
        let n = x.len();
        let m = match ends {
            SplineEnds::Natural => natural_moments(&x, &y),
            SplineEnds::Periodic => {
                let scale = y.iter().fold(T::zero(), |a, v| a.max(v.abs())) + T::one();
                if (y[n - 1] - y[0]).abs() > T::of(1e-9) * scale {
                    return Err(Error::invalid(
                        "interpolant",
                        "periodic spline requires matching end values",
                    ));
                }
                periodic_moments(&x, &y)
            }
        };
        Ok(CubicSpline { x, y, m })
    }

    pub fn domain(&self) -> (T, T) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn eval(&self, xv: T) -> T {
        self.eval_with_derivative(xv).0
    }

    pub fn eval_with_derivative(&self, xv: T) -> (T, T) {
        let i = locate(&self.x, xv);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - xv) / h;
        let b = (xv - self.x[i]) / h;
        let six = T::of(6.0);
        let v = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / six;
        let dv = (self.y[i + 1] - self.y[i]) / h
            + ((T::of(3.0) * b * b - T::one()) * self.m[i + 1]
                - (T::of(3.0) * a * a - T::one()) * self.m[i])
                * h
                / six;
        (v, dv)
    }

    /// Cumulative integral from the first node to every node.
    pub fn cumulative_integral(&self) -> Vec<T> {
        let n = self.x.len();
        let mut out = Vec::with_capacity(n);
        let mut acc = T::zero();
        out.push(acc);
        let twelve = T::of(12.0);
        for i in 0..n - 1 {
            let h = self.x[i + 1] - self.x[i];
            // Exact integral of the cubic segment.
            acc = acc + h * (self.y[i] + self.y[i + 1]) * T::half()
                - h * h * h * (self.m[i] + self.m[i + 1]) / (twelve * T::two());
            out.push(acc);
        }
        out
    }
}

fn thomas_solve<T: Real>(lower: &[T], diag: &mut [T], upper: &[T], rhs: &mut [T]) {
    let n = diag.len();
    for i in 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] = diag[i] - w * upper[i - 1];
        rhs[i] = rhs[i] - w * rhs[i - 1];
    }
    rhs[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

fn natural_moments<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    let mut m = vec![T::zero(); n];
    if n < 3 {
        return m;
    }
    let k = n - 2;
    let mut lower = vec![T::zero(); k];
    let mut diag = vec![T::zero(); k];
    let mut upper = vec![T::zero(); k];
    let mut rhs = vec![T::zero(); k];
    let six = T::of(6.0);
    for i in 0..k {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        lower[i] = h0;
        diag[i] = T::two() * (h0 + h1);
        upper[i] = h1;
        rhs[i] = six * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
    }
    thomas_solve(&lower, &mut diag, &upper, &mut rhs);
    m[1..=k].copy_from_slice(&rhs);
    m
}

fn periodic_moments<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    // Cyclic tridiagonal system for m[0..n-1] with m[n-1] tied back to m[0],
    // solved by Sherman–Morrison on top of two Thomas solves.
    let n = x.len();
    if n < 4 {
        return natural_moments(x, y);
    }
    let k = n - 1; // unknowns m[0..k-1], with m[k] = m[0]
    let h: Vec<T> = (0..k).map(|i| x[i + 1] - x[i]).collect();
    let six = T::of(6.0);

    let mut lower = vec![T::zero(); k];
    let mut diag0 = vec![T::zero(); k];
    let mut upper = vec![T::zero(); k];
    let mut rhs = vec![T::zero(); k];
    for i in 0..k {
        let hm = h[(i + k - 1) % k];
        let hp = h[i];
        let ym = y[if i == 0 { k - 1 } else { i - 1 }];
        let yp = y[i + 1];
        lower[i] = hm;
        diag0[i] = T::two() * (hm + hp);
        upper[i] = hp;
        rhs[i] = six * ((yp - y[i]) / hp - (y[i] - ym) / hm);
    }

    // Corner entries: a[0][k-1] = h[k-1], a[k-1][0] = h[k-1].
    let corner = h[k - 1];
    let gamma = -diag0[0];
    let mut diag = diag0.clone();
    diag[0] = diag0[0] - gamma;
    diag[k - 1] = diag0[k - 1] - corner * corner / gamma;

    let mut u = vec![T::zero(); k];
    u[0] = gamma;
    u[k - 1] = corner;

    let mut sol_y = rhs.clone();
    {
        let mut d = diag.clone();
        thomas_solve(&lower, &mut d, &upper, &mut sol_y);
    }
    let mut sol_q = u.clone();
    {
        let mut d = diag.clone();
        thomas_solve(&lower, &mut d, &upper, &mut sol_q);
    }

    let vy = sol_y[0] + corner / gamma * sol_y[k - 1];
    let vq = T::one() + sol_q[0] + corner / gamma * sol_q[k - 1];
    let factor = vy / vq;

    let mut m = vec![T::zero(); n];
    for i in 0..k {
        m[i] = sol_y[i] - factor * sol_q[i];
    }
    m[k] = m[0];
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pchip_reproduces_nodes_and_monotonicity() {
        let x: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&v| v + 0.3 * v.sin()).collect();
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (xv, yv) in x.iter().zip(y.iter()) {
            assert!((p.eval(*xv) - yv).abs() < 1e-15);
        }
        let mut prev = p.eval(0.0);
        for i in 1..=400 {
            let v = p.eval(i as f64 * 0.005);
            assert!(v >= prev - 1e-14, "monotonicity violated");
            prev = v;
        }
    }

    #[test]
    fn pchip_accuracy_on_smooth_data() {
        let n = 2048;
        let x: Vec<f64> = (0..=n).map(|i| PI * i as f64 / n as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| v + 0.2 * (2.0 * v).sin() * 0.5).collect();
        let p = Pchip::new(x, y).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let xv = PI * (i as f64 + 0.37) / 1000.0;
            let exact = xv + 0.2 * (2.0 * xv).sin() * 0.5;
            worst = worst.max((p.eval(xv) - exact).abs());
        }
        assert!(worst < 1e-9, "pchip error {worst:.3e}");
    }

    #[test]
    fn spline_derivative_matches() {
        let n = 200;
        let x: Vec<f64> = (0..=n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| v.sin()).collect();
        let s = CubicSpline::new(x, y, SplineEnds::Periodic).unwrap();
        for i in 0..100 {
            let xv = 2.0 * PI * (i as f64 + 0.5) / 100.0;
            let (v, dv) = s.eval_with_derivative(xv);
            assert!((v - xv.sin()).abs() < 1e-7);
            assert!((dv - xv.cos()).abs() < 1e-5);
        }
    }

    #[test]
    fn periodic_spline_beats_natural_at_ends() {
        let n = 256;
        let x: Vec<f64> = (0..=n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| (v.sin()).exp()).collect();
        let nat = CubicSpline::new(x.clone(), y.clone(), SplineEnds::Natural).unwrap();
        let per = CubicSpline::new(x, y, SplineEnds::Periodic).unwrap();
        let probe = 2.0 * PI * 0.002;
        let exact = (probe.sin()).exp();
        let err_nat = (nat.eval(probe) - exact).abs();
        let err_per = (per.eval(probe) - exact).abs();
        assert!(err_per < err_nat / 10.0, "periodic {err_per:.2e} natural {err_nat:.2e}");
        assert!(err_per < 1e-7, "periodic error {err_per:.2e}");
    }

    #[test]
    fn cumulative_integral_exact_for_cubic_data() {
        let x: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&v| v * v).collect();
        let s = CubicSpline::new(x.clone(), y, SplineEnds::Natural).unwrap();
        let cum = s.cumulative_integral();
        // Natural end conditions are only approximate for x^2, but away from
        // the ends the segment integrals track x^3/3 closely.
        let err = (cum[25] - x[25].powi(3) / 3.0).abs();
        assert!(err < 2e-4, "err {err:.2e}");
    }
}
