//! Floating-point scalar abstraction.
//!
//! All numerical code in this crate is written against [`Scalar`], which is
//! implemented for `f32` and `f64`. Tolerances are associated with the type
//! so that the same algorithms stay meaningful at single precision.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance for row sums and simplex membership.
    fn stochastic_tol() -> Self;
    /// Default relative threshold for the numerical rank.
    fn rank_tol() -> Self;
    /// Feasibility tolerance used by the LP routines.
    fn lp_tol() -> Self;
    /// Pivot magnitude below which an entry is treated as zero.
    fn pivot_tol() -> Self;
    /// Tolerance for matrix identities (reconstruction, right inverse).
    fn identity_tol() -> Self;

    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    fn stochastic_tol() -> Self {
        1e-12
    }
    fn rank_tol() -> Self {
        1e-10
    }
    fn lp_tol() -> Self {
        1e-9
    }
    fn pivot_tol() -> Self {
        1e-12
    }
    fn identity_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn stochastic_tol() -> Self {
        1e-5
    }
    fn rank_tol() -> Self {
        1e-5
    }
    fn lp_tol() -> Self {
        1e-4
    }
    fn pivot_tol() -> Self {
        1e-6
    }
    fn identity_tol() -> Self {
        1e-3
    }
}

/// Running Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier<T = f64> {
    sum: T,
    comp: T,
}

impl<T: Scalar> Neumaier<T> {
    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp = self.comp + ((self.sum - t) + v);
        } else {
            self.comp = self.comp + ((v - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.comp
    }
}

/// Neumaier compensated sum.
pub fn compensated_sum<T: Scalar, I: IntoIterator<Item = T>>(values: I) -> T {
    let mut acc = Neumaier { sum: T::zero(), comp: T::zero() };
    for v in values {
        acc.add(v);
    }
    acc.total()
}
