//! Scalar abstraction shared by every numerical kernel in the crate.
//!
//! All constitutive code (tensors, networks, residuals) is written once over
//! [`Real`] and instantiated with plain floats for evaluation, with
//! [`Dual`](crate::diff::Dual) for forward-mode Jacobians and with
//! [`Var`](crate::diff::Var) for reverse-mode parameter gradients.

use num_traits::{Num, NumAssignOps};
use std::fmt::Debug;
use std::ops::Neg;

/// Real-valued scalar usable by the generic kernels.
///
/// Comparisons (`PartialOrd`) always act on the primal value; they are only
/// used for branch selection and never carry derivative information.
pub trait Real: Num + NumAssignOps + Neg<Output = Self> + Copy + PartialOrd + Debug {
    /// Lift a constant (zero derivative).
    fn cst(v: f64) -> Self;
    /// Primal value.
    fn value(&self) -> f64;

    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    /// `self^p` for a constant exponent.
    fn powf(self, p: f64) -> Self;

    fn abs(self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self
        }
    }

    /// `self^p` for a differentiable exponent; requires `self > 0`.
    fn pow_real(self, p: Self) -> Self {
        (p * self.ln()).exp()
    }

    fn recip(self) -> Self {
        Self::one() / self
    }

    fn max_real(self, other: Self) -> Self {
        if self.value() >= other.value() {
            self
        } else {
            other
        }
    }

    fn is_finite_value(&self) -> bool {
        self.value().is_finite()
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn pow_real(self, p: Self) -> Self {
        f64::powf(self, p)
    }
}

impl Real for f32 {
    #[inline]
    fn cst(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn value(&self) -> f64 {
        *self as f64
    }
    #[inline]
    fn exp(self) -> Self {
        f32::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f32::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f32::sqrt(self)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f32::powf(self, p as f32)
    }
    #[inline]
    fn abs(self) -> Self {
        f32::abs(self)
    }
}

/// Shorthand for [`Real::cst`].
#[inline]
pub fn c<T: Real>(v: f64) -> T {
    T::cst(v)
}

/// Convert a slice of floats into constants of another scalar type.
pub fn lift<T: Real>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::cst(x)).collect()
}

/// Primal values of a slice.
pub fn values<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(Real::value).collect()
}

/// Numerically stable `ln(1 + exp(x))`.
pub fn log1p_exp<T: Real>(x: T) -> T {
    if x.value() > 0.0 {
        x + ((-x).exp() + T::one()).ln()
    } else {
        (x.exp() + T::one()).ln()
    }
}

/// Logistic sigmoid `1 / (1 + exp(-x))`, evaluated without overflow.
pub fn sigmoid<T: Real>(x: T) -> T {
    if x.value() >= 0.0 {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}
