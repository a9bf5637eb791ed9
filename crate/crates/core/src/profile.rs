//! The medium modulation G(psi) / Q(psi) and physical refractive profiles.
//!
//! A modulation assigns to each phase value psi a log-wavenumber G(psi) and
//! its derivative; the local wavenumber is Q(psi) = q0 exp(G(psi)). The
//! canonical modulation is a truncated Fourier series in the even harmonics
//! ([`PhaseProfile`]), but linear-in-psi and sampled modulations arise from
//! the complex-band machinery, so the band pipelines accept anything
//! implementing [`Modulation`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::interp::{CubicSpline, Pchip, SplineEnds};
use crate::real::Real;
use crate::realband::ParametricCurve;

/// Source of the modulation G(psi), its derivative, and the base wavenumber.
pub trait Modulation<T: Real> {
    fn q0(&self) -> T;

    /// Returns (G, dG/dpsi) at psi.
    fn eval_g(&self, psi: T) -> (T, T);

    /// Local wavenumber Q(psi) = q0 exp(G(psi)); strictly positive.
    fn eval_q(&self, psi: T) -> T {
        self.q0() * self.eval_g(psi).0.exp()
    }
}

impl<T: Real, M: Modulation<T> + ?Sized> Modulation<T> for &M {
    fn q0(&self) -> T {
        (**self).q0()
    }
    fn eval_g(&self, psi: T) -> (T, T) {
        (**self).eval_g(psi)
    }
}

/// Fourier modulation G = a0 + sum_m (a_{2m} cos 2m psi + b_{2m} sin 2m psi).
///
/// All harmonics are even, so G is pi-periodic exactly. The harmonic cutoff
/// is the common length of the coefficient lists (explicit user input; no
/// automatic truncation).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Deserialize<'de> + Real"
))]
#[serde(try_from = "PhaseProfileRaw<T>")]
pub struct PhaseProfile<T> {
    q0: T,
    a0: T,
    a: Vec<T>,
    b: Vec<T>,
}

/// Wire form of [`PhaseProfile`]; lengths of `a` and `b` may differ and are
/// padded on construction.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseProfileRaw<T> {
    q0: T,
    #[serde(default)]
    a0: Option<T>,
    #[serde(default)]
    a: Vec<T>,
    #[serde(default)]
    b: Vec<T>,
}

impl<T: Real> TryFrom<PhaseProfileRaw<T>> for PhaseProfile<T> {
    type Error = Error;
    fn try_from(raw: PhaseProfileRaw<T>) -> Result<Self> {
        PhaseProfile::new(raw.q0, raw.a0.unwrap_or_else(T::zero), raw.a, raw.b)
    }
}

impl<T: Real> PhaseProfile<T> {
    /// `a` and `b` hold the cosine/sine coefficients of harmonics 2, 4, ...;
    /// the shorter list is padded with zeros.
    pub fn new(q0: T, a0: T, mut a: Vec<T>, mut b: Vec<T>) -> Result<Self> {
        if !(q0 > T::zero()) || !q0.is_finite() {
            return Err(Error::invalid("PhaseProfile", "q0 must be positive"));
        }
        let m = a.len().max(b.len());
        a.resize(m, T::zero());
        b.resize(m, T::zero());
        for v in a.iter().chain(b.iter()).chain(std::iter::once(&a0)) {
            if !v.is_finite() {
                return Err(Error::invalid("PhaseProfile", "coefficients must be finite"));
            }
        }
        Ok(PhaseProfile { q0, a0, a, b })
    }

    /// Uniform medium: G = 0, Q = q0.
    pub fn uniform(q0: T) -> Self {
        PhaseProfile::new(q0, T::zero(), vec![], vec![]).expect("q0 validated by caller")
    }

    /// Single sine harmonic b_{2} (the workhorse stop-band profile).
    pub fn single_sine(q0: T, b2: T) -> Result<Self> {
        PhaseProfile::new(q0, T::zero(), vec![], vec![b2])
    }

    pub fn a0(&self) -> T {
        self.a0
    }

    pub fn cosine_coeffs(&self) -> &[T] {
        &self.a
    }

    pub fn sine_coeffs(&self) -> &[T] {
        &self.b
    }

    /// Harmonic cutoff: number of (a_{2m}, b_{2m}) pairs.
    pub fn m_max(&self) -> usize {
        self.a.len()
    }
}

impl<T: Real> Modulation<T> for PhaseProfile<T> {
    fn q0(&self) -> T {
        self.q0
    }

    fn eval_g(&self, psi: T) -> (T, T) {
        let mut g = self.a0;
        let mut gdot = T::zero();
        for (m, (&am, &bm)) in self.a.iter().zip(self.b.iter()).enumerate() {
            let freq = T::of(2.0 * (m + 1) as f64);
            let (s, c) = (freq * psi).sin_cos();
            g = g + am * c + bm * s;
            gdot = gdot + freq * (bm * c - am * s);
        }
        (g, gdot)
    }
}

/// G linear in psi: G = slope (psi - psi0). This is the modulation paired
/// with a constant auxiliary function C.
#[derive(Debug, Clone, Copy)]
pub struct LinearModulation<T> {
    pub q0: T,
    pub slope: T,
    pub psi0: T,
}

impl<T: Real> Modulation<T> for LinearModulation<T> {
    fn q0(&self) -> T {
        self.q0
    }
    fn eval_g(&self, psi: T) -> (T, T) {
        (self.slope * (psi - self.psi0), self.slope)
    }
}

/// Modulation backed by sampled (G, Gdot) values, interpolated monotonically
/// in psi with PCHIP. Used for modulations recovered numerically from a
/// C-trajectory.
#[derive(Debug, Clone)]
pub struct SampledModulation<T> {
    q0: T,
    g: Pchip<T>,
    gdot: Pchip<T>,
}

impl<T: Real> SampledModulation<T> {
    pub fn new(q0: T, psi: Vec<T>, g: Vec<T>, gdot: Vec<T>) -> Result<Self> {
        if !(q0 > T::zero()) {
            return Err(Error::invalid("SampledModulation", "q0 must be positive"));
        }
        Ok(SampledModulation {
            q0,
            g: Pchip::new(psi.clone(), g)?,
            gdot: Pchip::new(psi, gdot)?,
        })
    }

    pub fn domain(&self) -> (T, T) {
        self.g.domain()
    }
}

impl<T: Real> Modulation<T> for SampledModulation<T> {
    fn q0(&self) -> T {
        self.q0
    }
    fn eval_g(&self, psi: T) -> (T, T) {
        (self.g.eval(psi), self.gdot.eval(psi))
    }
}

/// Physical refractive profile: q sampled on an increasing x grid, with a
/// smooth interpolant (periodic end conditions when a spatial period is
/// declared) and the scale factor mapping q to the refraction index
/// n = scale * q.
#[derive(Debug, Clone)]
pub struct RefractiveProfile<T> {
    x_grid: Vec<T>,
    q_values: Vec<T>,
    spatial_period: Option<T>,
    scale: T,
    spline: CubicSpline<T>,
}

impl<T: Real> RefractiveProfile<T> {
    pub fn new(
        x_grid: Vec<T>,
        q_values: Vec<T>,
        spatial_period: Option<T>,
        scale: T,
    ) -> Result<Self> {
        if x_grid.len() != q_values.len() {
            return Err(Error::invalid("RefractiveProfile", "length mismatch"));
        }
        for w in x_grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::invalid(
                    "RefractiveProfile",
                    "x grid must be strictly increasing",
                ));
            }
        }
        for &q in &q_values {
            if !(q > T::zero()) || !q.is_finite() {
                return Err(Error::invalid(
                    "RefractiveProfile",
                    "q values must be positive and finite",
                ));
            }
        }

        let mut ends = SplineEnds::Natural;
        if let Some(period) = spatial_period {
            if !(period > T::zero()) {
                return Err(Error::invalid(
                    "RefractiveProfile",
                    "spatial period must be positive",
                ));
            }
            let span = x_grid[x_grid.len() - 1] - x_grid[0];
            if span >= period * (T::one() - T::of(1e-12)) {
                // Wrap-around consistency: q at the period end must match the
                // start within interpolation tolerance.
                let q_start = q_values[0];
                let q_wrap = q_values[q_values.len() - 1];
                let tol = T::of(1e-6) * (q_start.abs() + q_wrap.abs());
                // Grids spanning a whole number of periods close cyclically,
                // which keeps the interpolant fourth-order at the seam.
                let cycles = (span / period).round();
                let whole_cycles = (span - cycles * period).abs() <= T::of(1e-9) * period;
                if whole_cycles {
                    if (q_wrap - q_start).abs() > tol {
                        return Err(Error::invalid(
                            "RefractiveProfile",
                            "q does not wrap around the declared spatial period",
                        ));
                    }
                    ends = SplineEnds::Periodic;
                }
            }
        }

        let spline = CubicSpline::new(x_grid.clone(), q_values.clone(), ends)?;
        Ok(RefractiveProfile {
            x_grid,
            q_values,
            spatial_period,
            scale,
            spline,
        })
    }

    pub fn x_grid(&self) -> &[T] {
        &self.x_grid
    }

    pub fn q_values(&self) -> &[T] {
        &self.q_values
    }

    pub fn spatial_period(&self) -> Option<T> {
        self.spatial_period
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    /// Interpolated q at x (clamped to the grid span).
    pub fn q_at(&self, x: T) -> T {
        self.spline.eval(x)
    }

    /// Interpolated (q, q') at x.
    pub fn q_with_derivative(&self, x: T) -> (T, T) {
        self.spline.eval_with_derivative(x)
    }

    /// Refraction index n(x) = scale * q(x).
    pub fn n_at(&self, x: T) -> T {
        self.scale * self.q_at(x)
    }
}

/// Invert x = X(psi) on a parametric curve and return the medium q(x).
///
/// Samples are taken at the curve's own nodes, so q_i = Q(psi_i) exactly; the
/// monotone inversion psi(x) is available through [`PsiOfX`]. The spatial
/// period is X(psi0 + P) - X(psi0) when the curve declares a psi-period P
/// (pi for stop-band curves, tau for family orbits).
pub fn reconstruct_q_of_x<T: Real>(
    modulation: &impl Modulation<T>,
    curve: &ParametricCurve<T>,
    scale: T,
) -> Result<RefractiveProfile<T>> {
    let x = curve.x();
    for (i, w) in x.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NonMonotoneX { index: i + 1 });
        }
    }
    let q: Vec<T> = curve.psi().iter().map(|&p| modulation.eval_q(p)).collect();

    let spatial_period = match curve.psi_period() {
        Some(period) => {
            let psi0 = curve.psi()[0];
            let target = psi0 + period;
            let last = curve.psi()[curve.psi().len() - 1];
            if last >= target - T::of(1e-12) * period {
                let inv = Pchip::new(curve.psi().to_vec(), x.to_vec())?;
                Some(inv.eval(target) - x[0])
            } else {
                None
            }
        }
        None => None,
    };

    RefractiveProfile::new(x.to_vec(), q, spatial_period, scale)
}

/// Monotone-cubic inversion psi(x) of a parametric curve.
pub struct PsiOfX<T> {
    inv: Pchip<T>,
}

impl<T: Real> PsiOfX<T> {
    pub fn new(curve: &ParametricCurve<T>) -> Result<Self> {
        for (i, w) in curve.x().windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::NonMonotoneX { index: i + 1 });
            }
        }
        Ok(PsiOfX {
            inv: Pchip::new(curve.x().to_vec(), curve.psi().to_vec())?,
        })
    }

    pub fn eval(&self, x: T) -> T {
        self.inv.eval(x)
    }
}
