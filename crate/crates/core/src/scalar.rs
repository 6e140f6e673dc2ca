//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{Float, FloatConst};

/// Real scalar type underlying all amplitudes.
///
/// Implemented for `f32` and `f64`. Amplitudes are `Complex<T>` and every
/// matrix that needs a decomposition goes through nalgebra, hence the
/// `RealField` bound.
pub trait Real: Float + FloatConst + RealField + Copy + Debug + Display + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal or tolerance.
    fn of(x: f64) -> Self;

    /// Widening conversion used for reporting.
    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn of(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Complex amplitude over the scalar type `T`.
pub type Amplitude<T> = Complex<T>;

#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::of(re), T::of(im))
}

#[inline]
pub fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn one<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// Unit-modulus amplitude `exp(i theta)`.
#[inline]
pub fn phase<T: Real>(theta: T) -> Complex<T> {
    Complex::new(Float::cos(theta), Float::sin(theta))
}

/// Default tolerances.
pub mod tol {
    /// Norm and general equality checks.
    pub const NORM: f64 = 1e-10;
    /// Unitarity of block operators.
    pub const UNITARY: f64 = 1e-10;
    /// The all-quiescent block must be fixed to this precision.
    pub const QUIESCENT: f64 = 1e-12;
    /// Commutation of shifted copies of a multilayer block operator.
    pub const COMMUTE: f64 = 1e-9;
    /// Trace-distance threshold for the causality check.
    pub const CAUSAL: f64 = 1e-9;
    /// Allowed shortfall of simulation fidelities and Schmidt coefficients.
    pub const FIDELITY: f64 = 1e-9;
    /// Loose norm check applied to states read from files.
    pub const INPUT_NORM: f64 = 1e-6;
}
