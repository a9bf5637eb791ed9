//! Complete elliptic integral K and Jacobi elliptic functions via
//! arithmetic-geometric-mean / descending-Landen recurrences.
//!
//! Modulus convention: the second argument `p` everywhere is the modulus k
//! itself, NOT the parameter m = k^2. Conventions differ across references;
//! this one matches `sn(u, p)` with quarter period K(p) below.

use crate::error::{Error, Result};
use crate::real::Real;

const MAX_ITER: usize = 64;

/// Complete elliptic integral of the first kind, modulus convention:
/// K(p) = integral of 1/sqrt(1 - p^2 sin^2 t) over [0, pi/2].
///
/// AGM: K = pi / (2 agm(1, sqrt(1 - p^2))).
pub fn elliptic_k<T: Real>(p: T) -> Result<T> {
    if p < T::zero() || p >= T::one() {
        return Err(Error::ModulusOne {
            p: p.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut a = T::one();
    let mut b = (T::one() - p * p).sqrt();
    for _ in 0..MAX_ITER {
        let an = (a + b) * T::half();
        let bn = (a * b).sqrt();
        if (a - b).abs() <= T::epsilon() * a {
            break;
        }
        a = an;
        b = bn;
    }
    Ok(T::PI() / (T::two() * ((a + b) * T::half())))
}

/// Jacobi sn, cn, dn at one point.
#[derive(Debug, Clone, Copy)]
pub struct JacobiElliptic<T> {
    pub sn: T,
    pub cn: T,
    pub dn: T,
}

/// Jacobi elliptic functions sn/cn/dn of modulus p in [0, 1].
///
/// Descending-Landen ladder on the complementary parameter with the
/// backward recurrence for dn (the classic sncndn scheme), run to a
/// convergence threshold tight enough for ~1e-15 results.
pub fn jacobi_sncndn<T: Real>(u: T, p: T) -> JacobiElliptic<T> {
    assert!(
        p >= T::zero() && p <= T::one(),
        "modulus out of range: p = {p}"
    );

    // Complementary parameter m1 = 1 - p^2.
    let mut emc = (T::one() - p) * (T::one() + p);
    if emc == T::zero() {
        // p = 1: sn = tanh, cn = dn = sech.
        let sech = T::one() / u.cosh();
        return JacobiElliptic {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        };
    }

    // Accuracy is roughly the square of this threshold.
    let ca = T::epsilon().sqrt() * T::half();

    let mut em = [T::zero(); MAX_ITER];
    let mut en = [T::zero(); MAX_ITER];
    let mut a = T::one();
    let mut dn = T::one();
    let mut c = T::zero();
    let mut l = 0usize;
    for i in 0..MAX_ITER {
        l = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = (a + emc) * T::half();
        if (a - emc).abs() <= ca * a {
            break;
        }
        emc = emc * a;
        a = c;
    }

    let scaled = u * c;
    let (mut sn, mut cn) = scaled.sin_cos();
    if sn != T::zero() {
        let mut aa = cn / sn;
        c = c * aa;
        for ii in (0..=l).rev() {
            let b = em[ii];
            aa = aa * c;
            c = c * dn;
            dn = (en[ii] + aa) / (b + aa);
            aa = c / b;
        }
        let inv = T::one() / (c * c + T::one()).sqrt();
        sn = if sn >= T::zero() { inv } else { -inv };
        cn = c * sn;
    }
    JacobiElliptic { sn, cn, dn }
}

/// Jacobi elliptic sine (modulus convention, see module docs).
pub fn jacobi_sn<T: Real>(u: T, p: T) -> T {
    jacobi_sncndn(u, p).sn
}
