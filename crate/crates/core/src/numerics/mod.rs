//! Self-contained numerical kernels: quadrature (adaptive Gauss–Kronrod,
//! composite Gauss–Legendre, turning-point rules), adaptive Runge–Kutta,
//! Jacobi elliptic functions, and interpolation.
//!
//! Everything here is stateless and reentrant.

pub mod elliptic;
pub mod interp;
pub mod ode;
pub mod quad;
pub mod turning;

pub use elliptic::{elliptic_k, jacobi_sn, jacobi_sncndn, JacobiElliptic};
pub use interp::{CubicSpline, Pchip, SplineEnds};
pub use ode::{ode_solve, OdeOptions, OdeTrajectory};
pub use quad::{
    cumulative_gl5, gl5_panel, quad_adaptive, quad_fixed_gl5, QuadValue, QuadratureResult,
};
pub use turning::{quad_turning, quad_turning_upper};
