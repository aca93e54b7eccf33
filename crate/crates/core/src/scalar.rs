//! Floating-point abstraction shared by every solver in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A real scalar the solvers can run on: `f32` or `f64`.
///
/// Tolerances are part of the scalar because the invariants the crate checks
/// (row-stochastic transitions, normalized occupancies, linear-solve residuals)
/// can only be met to the precision of the underlying type.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Tolerance on probability sums of inputs (transition rows, policies, d0).
    fn prob_tol() -> Self;
    /// Tolerance on derived distributions (occupancies) and solve residuals.
    fn solve_tol() -> Self;

    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    fn prob_tol() -> Self {
        1e-12
    }
    fn solve_tol() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn prob_tol() -> Self {
        1e-5
    }
    fn solve_tol() -> Self {
        1e-4
    }
}

/// Sum of a slice using Neumaier compensation.
pub(crate) fn kahan_sum<T: Scalar>(xs: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp = comp + ((sum - t) + x);
        } else {
            comp = comp + ((x - t) + sum);
        }
        sum = t;
    }
    sum + comp
}
