//! Embedded adaptive Runge–Kutta integration (Dormand–Prince 5(4)) with
//! cubic-Hermite dense output.

use crate::error::{Error, Result};
use crate::real::Real;

/// Step-size control options.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub h_init: Option<T>,
    /// Cap on the step size. Dense output between accepted steps is a cubic
    /// Hermite interpolant (error O(h^4)), so callers that sample between
    /// steps tighten this.
    pub h_max: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        OdeOptions {
            rel_tol: T::of(1e-10),
            abs_tol: T::of(1e-10),
            h_init: None,
            h_max: None,
            max_steps: 1_000_000,
        }
    }
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        OdeOptions {
            rel_tol: tol,
            abs_tol: tol,
            ..Default::default()
        }
    }
}

/// Accepted steps of a solve: states and derivatives at the step points.
#[derive(Debug, Clone)]
pub struct OdeTrajectory<T, const N: usize> {
    pub t: Vec<T>,
    pub y: Vec<[T; N]>,
    pub dy: Vec<[T; N]>,
}

impl<T: Real, const N: usize> OdeTrajectory<T, N> {
    pub fn last(&self) -> [T; N] {
        *self.y.last().expect("trajectory has at least one point")
    }

    pub fn t_end(&self) -> T {
        *self.t.last().expect("trajectory has at least one point")
    }

    fn segment_of(&self, t: T) -> usize {
        // Largest i with t[i] <= t, clamped to a valid segment start.
        match self
            .t
            .binary_search_by(|probe| probe.partial_cmp(&t).expect("finite times"))
        {
            Ok(i) => i.min(self.t.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.t.len() - 2),
        }
    }

    /// Cubic-Hermite dense evaluation, clamped to the solved span.
    pub fn eval(&self, t: T) -> [T; N] {
        self.eval_with_derivative(t).0
    }

    pub fn eval_with_derivative(&self, t: T) -> ([T; N], [T; N]) {
        if self.t.len() == 1 {
            return (self.y[0], self.dy[0]);
        }
        let i = self.segment_of(t);
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let h = t1 - t0;
        let s = ((t - t0) / h).max(T::zero()).min(T::one());

        let h00 = (T::one() + T::two() * s) * (T::one() - s) * (T::one() - s);
        let h10 = s * (T::one() - s) * (T::one() - s);
        let h01 = s * s * (T::of(3.0) - T::two() * s);
        let h11 = s * s * (s - T::one());

        let d00 = T::of(6.0) * s * (s - T::one());
        let d10 = (T::one() - s) * (T::one() - T::of(3.0) * s);
        let d01 = -d00;
        let d11 = s * (T::of(3.0) * s - T::two());

        let mut y = [T::zero(); N];
        let mut dy = [T::zero(); N];
        for k in 0..N {
            y[k] = h00 * self.y[i][k]
                + h10 * h * self.dy[i][k]
                + h01 * self.y[i + 1][k]
                + h11 * h * self.dy[i + 1][k];
            dy[k] = (d00 * self.y[i][k] + d01 * self.y[i + 1][k]) / h
                + d10 * self.dy[i][k]
                + d11 * self.dy[i + 1][k];
        }
        (y, dy)
    }
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th-order minus 4th-order weights (error estimator).
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Solve y' = f(t, y) over the forward span with adaptive Dormand–Prince 5(4).
///
/// Accepted steps land in the returned trajectory; `StepFailure` is raised if
/// the controller cannot meet the local tolerance above the minimum step.
pub fn ode_solve<T: Real, const N: usize>(
    f: impl Fn(T, &[T; N]) -> [T; N],
    span: (T, T),
    y0: [T; N],
    opts: &OdeOptions<T>,
) -> Result<OdeTrajectory<T, N>> {
    let (t0, t_end) = span;
    if !(t_end >= t0) {
        return Err(Error::invalid("ode span", "end must be >= start"));
    }

    let mut traj = OdeTrajectory {
        t: vec![t0],
        y: vec![y0],
        dy: vec![f(t0, &y0)],
    };
    if t_end == t0 {
        return Ok(traj);
    }

    let span_len = t_end - t0;
    let h_max = opts.h_max.unwrap_or(span_len);
    let h_min = span_len * T::epsilon() * T::of(16.0);

    let mut t = t0;
    let mut y = y0;
    let mut k1 = traj.dy[0];
    let mut h = opts.h_init.unwrap_or(span_len * T::of(1e-3)).min(h_max);

    let order_exp = T::one() / T::of(5.0);
    let safety = T::of(0.9);

    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok(traj);
        }
        h = h.min(t_end - t).min(h_max);

        // Stages.
        let mut k = [[T::zero(); N]; 7];
        k[0] = k1;
        for s in 0..6 {
            let mut ys = [T::zero(); N];
            for j in 0..N {
                let mut acc = T::zero();
                for (i, ki) in k.iter().enumerate().take(s + 1) {
                    let a = T::of(A[s][i]);
                    if a != T::zero() {
                        acc += a * ki[j];
                    }
                }
                ys[j] = y[j] + h * acc;
            }
            k[s + 1] = f(t + h * T::of(C[s]), &ys);
        }

        // 5th-order solution (FSAL: same weights as the last stage row).
        let mut y5 = [T::zero(); N];
        for j in 0..N {
            let mut acc = T::zero();
            for (i, ki) in k.iter().enumerate().take(6) {
                let a = T::of(A[5][i]);
                if a != T::zero() {
                    acc += a * ki[j];
                }
            }
            y5[j] = y[j] + h * acc;
        }

        // Scaled error norm.
        let mut err = T::zero();
        let mut finite = true;
        for j in 0..N {
            let mut e = T::zero();
            for (i, ki) in k.iter().enumerate() {
                let c = T::of(E[i]);
                if c != T::zero() {
                    e += c * ki[j];
                }
            }
            e = e * h;
            let scale = opts.abs_tol + opts.rel_tol * y[j].abs().max(y5[j].abs());
            let r = e / scale;
            err = err + r * r;
            if !y5[j].is_finite() {
                finite = false;
            }
        }
        err = (err / T::of(N as f64)).sqrt();

        if finite && err <= T::one() {
            t = t + h;
            y = y5;
            k1 = k[6]; // FSAL
            traj.t.push(t);
            traj.y.push(y);
            traj.dy.push(k1);

            let factor = if err == T::zero() {
                T::of(5.0)
            } else {
                (safety * err.powf(-order_exp)).min(T::of(5.0))
            };
            h = h * factor;
        } else {
            let factor = if finite {
                (safety * err.powf(-order_exp)).max(T::of(0.2))
            } else {
                T::of(0.2)
            };
            h = h * factor;
            if h < h_min {
                return Err(Error::StepFailure {
                    t: t.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }

    Err(Error::StepFailure {
        t: t.to_f64().unwrap_or(f64::NAN),
    })
}
