//! Numerical laboratory for the focusing logarithmic Schrödinger equation
//! i ∂_t u + ½ Δu + λ u ln|u|² = 0 on ℝ^d with λ > 0.
//!
//! The crate provides
//!
//! * [`gaussian`] — the exact Gaussian flow: the complex matrix ODE
//!   dA/dt = −iA² + 2iλ Re A, the 1D width ODE r̈ = 1/r³ − 2λ/r, and
//!   closed-form evaluation of Gaussons and general Gaussian solutions;
//! * [`solver`] — a split-step pseudospectral integrator on a periodic box
//!   with regularized logarithm, plus mass/momentum/energy and the
//!   L², H¹ and F(H¹) norms;
//! * [`multisoliton`] — the backward construction from final data
//!   u_n(T_n) = B(T_n) together with decay-rate fits;
//! * [`localized`] — the moving partition of unity and localized
//!   mass/momentum/energy/action diagnostics;
//! * [`inequality`] — randomized certification of the pointwise and
//!   Gaussian-tail inequalities the estimates rest on.
//!
//! All numerics are generic over the scalar type through [`Real`] (and
//! [`SolverReal`] where an FFT is involved); `f64` aliases are exported at
//! the crate root.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

pub mod gaussian;
pub mod grid;
pub mod inequality;
pub mod linalg;
pub mod localized;
pub mod multisoliton;
pub mod ode;
pub mod quadrature;
pub mod solver;

/// Scalar type for all core numerics.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + NumAssign + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
}

/// Scalar type usable in the pseudospectral solver (adds the FFT bound).
pub trait SolverReal: Real + rustfft::FftNum {}

impl<T> SolverReal for T where T: Real + rustfft::FftNum {}

/// Shorthand for converting an `f64` literal into the working scalar.
#[inline]
pub fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 -> scalar conversion")
}

/// z ln|z|², with the continuity convention 0·ln 0 ≔ 0.
///
/// Guarded against subnormal moduli so the logarithm never produces an
/// infinity that would poison a 0·∞ product.
#[inline]
pub fn z_ln_norm_sq<T: Real>(z: Complex<T>) -> Complex<T> {
    let a = z.norm();
    if a > T::min_positive_value() {
        z * (cast::<T>(2.0) * a.ln())
    } else {
        Complex::new(T::zero(), T::zero())
    }
}

/// Formats a float with 17 significant digits, enough to round-trip f64.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub type C64 = Complex<f64>;
pub type Grid64 = grid::Grid<f64>;
pub type Field64 = grid::Field<f64>;
pub type GaussianParams64 = gaussian::GaussianParams<f64>;
pub type GaussianState64 = gaussian::GaussianState<f64>;
pub type BreatherState64 = gaussian::BreatherState<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type NormReport64 = solver::NormReport<f64>;
pub type MultiConfig64 = multisoliton::MultiConfig<f64>;
pub type DecayFit64 = multisoliton::DecayFit<f64>;
pub type Partition64 = localized::Partition<f64>;
pub type LocalizedReport64 = localized::LocalizedReport<f64>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xlogx_convention_at_zero() {
        let z = C64::new(0.0, 0.0);
        assert_eq!(z_ln_norm_sq(z), C64::new(0.0, 0.0));
        let tiny = C64::new(1e-320, 0.0);
        assert!(z_ln_norm_sq(tiny).norm().is_finite());
    }

    #[test]
    fn g17_roundtrip() {
        let x = std::f64::consts::PI * 1e-7;
        let s = fmt_g17(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }
}
