//! Scalar abstraction: every geometric routine in this crate is generic over a
//! field type. Two backends are provided: `f64` for fast evaluation and
//! `BigRational` for exact runs (oracles, acceptance tests, `--rational`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field scalar used throughout the kernel.
///
/// `EXACT` backends ignore tolerances: a residual is zero iff it is exactly
/// zero. Inexact backends (f64) compare residuals against a relative
/// tolerance carried by [`Tol`].
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Signed
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    /// Exact embedding of an f64 (binary floats are rationals).
    fn from_f64(x: f64) -> Self;

    /// Best-effort conversion for reporting and export.
    fn to_f64(&self) -> f64;

    /// Ratio of two small integers, the workhorse of test data generators.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Relative tolerance for zero tests on inexact scalars.
///
/// The default 1e-9 can be overridden per call site, per document, or through
/// the `SCNET_TOL` environment variable (read by the CLI, not here).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tol {
    pub rel: f64,
}

pub const DEFAULT_TOL: f64 = 1e-9;

impl Default for Tol {
    fn default() -> Self {
        Tol { rel: DEFAULT_TOL }
    }
}

impl Tol {
    pub fn new(rel: f64) -> Self {
        Tol { rel }
    }

    /// Is `r` zero relative to a quantity of magnitude `scale`?
    ///
    /// Exact backends ignore both the tolerance and the scale.
    pub fn is_zero_rel<S: Scalar>(&self, r: &S, scale: f64) -> bool {
        if S::EXACT {
            r.is_zero()
        } else {
            r.to_f64().abs() <= self.rel * scale.max(1e-300)
        }
    }

    /// Zero test for residuals that are already normalized to O(1) inputs.
    pub fn is_zero<S: Scalar>(&self, r: &S) -> bool {
        self.is_zero_rel(r, 1.0)
    }
}

/// Absolute value of the numerically largest entry, used for max-abs
/// normalization of homogeneous vectors.
pub fn max_abs<S: Scalar>(v: &[S]) -> S {
    let mut m = S::zero();
    for x in v {
        let a = x.abs();
        if a > m {
            m = a;
        }
    }
    m
}
