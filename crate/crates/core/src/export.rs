//! Machine-readable exports: CSV curves and JSON metric reports.
//!
//! Floats are written with 17 significant digits in a fixed scientific
//! format, so reruns produce byte-identical files.

use num_complex::Complex;
use serde::Serialize;

use crate::complexband::CFunction;
use crate::oracle::{BandKind, MonodromyResult};
use crate::profile::{Modulation, RefractiveProfile};
use crate::real::Real;
use crate::realband::{BandMetrics, ParametricCurve};

/// 17-significant-digit scientific form, stable across runs.
pub fn fmt_float<T: Real>(v: T) -> String {
    let v = v.to_f64().unwrap_or(f64::NAN);
    format!("{v:.16e}")
}

/// CSV of a parametric curve: `psi,x,re_w,im_w,re_y,im_y`.
pub fn curve_csv<T: Real>(curve: &ParametricCurve<T>) -> String {
    let mut out = String::from("psi,x,re_w,im_w,re_y,im_y\n");
    for i in 0..curve.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_float(curve.psi()[i]),
            fmt_float(curve.x()[i]),
            fmt_float(curve.w()[i].re),
            fmt_float(curve.w()[i].im),
            fmt_float(curve.y()[i].re),
            fmt_float(curve.y()[i].im),
        ));
    }
    out
}

/// CSV of the complex-band pipeline with the C-trajectory alongside:
/// `psi,c,cdot,g,re_y,im_y,x,re_w,im_w`.
pub fn complexband_csv<T: Real>(
    modulation: &impl Modulation<T>,
    cfun: &CFunction<T>,
    curve: &ParametricCurve<T>,
) -> String {
    let mut out = String::from("psi,c,cdot,g,re_y,im_y,x,re_w,im_w\n");
    for i in 0..curve.len() {
        let psi = curve.psi()[i];
        let (c, cdot, _) = cfun.eval(psi);
        let (g, _) = modulation.eval_g(psi);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_float(psi),
            fmt_float(c),
            fmt_float(cdot),
            fmt_float(g),
            fmt_float(curve.y()[i].re),
            fmt_float(curve.y()[i].im),
            fmt_float(curve.x()[i]),
            fmt_float(curve.w()[i].re),
            fmt_float(curve.w()[i].im),
        ));
    }
    out
}

/// CSV of a refractive profile: `x,q,n`.
pub fn refractive_csv<T: Real>(medium: &RefractiveProfile<T>) -> String {
    let mut out = String::from("x,q,n\n");
    for (x, q) in medium.x_grid().iter().zip(medium.q_values().iter()) {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_float(*x),
            fmt_float(*q),
            fmt_float(*q * medium.scale()),
        ));
    }
    out
}

/// JSON-serializable form of [`BandMetrics`].
#[derive(Debug, Serialize)]
pub struct BandMetricsReport {
    pub spatial_period: f64,
    pub nu: f64,
    pub eta: f64,
    pub increment_real: f64,
    pub tau: f64,
    pub t_modulation: f64,
    pub mu_re: f64,
    pub mu_im: f64,
}

impl<T: Real> From<&BandMetrics<T>> for BandMetricsReport {
    fn from(m: &BandMetrics<T>) -> Self {
        let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
        BandMetricsReport {
            spatial_period: f(m.spatial_period),
            nu: f(m.nu),
            eta: f(m.eta),
            increment_real: f(m.increment_real),
            tau: f(m.tau),
            t_modulation: f(m.t_modulation),
            mu_re: f(m.mu.re),
            mu_im: f(m.mu.im),
        }
    }
}

/// JSON-serializable monodromy report:
/// `{trace, det, multipliers, mu_re, mu_im, band}`.
#[derive(Debug, Serialize)]
pub struct MonodromyReport {
    pub trace: f64,
    pub det: f64,
    /// [[re, im], [re, im]], largest magnitude first.
    pub multipliers: [[f64; 2]; 2],
    pub mu_re: f64,
    pub mu_im: f64,
    pub band: BandKind,
}

impl MonodromyReport {
    pub fn new<T: Real>(m: &MonodromyResult<T>, band: BandKind) -> Self {
        let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
        let c = |z: Complex<T>| [f(z.re), f(z.im)];
        MonodromyReport {
            trace: f(m.trace),
            det: f(m.det),
            multipliers: [c(m.multipliers.0), c(m.multipliers.1)],
            mu_re: f(m.exponent_mu.re),
            mu_im: f(m.exponent_mu.im),
            band,
        }
    }
}
