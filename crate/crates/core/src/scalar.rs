//! The scalar abstraction shared by the channel-matrix machinery.
//!
//! Channel matrices only ever need ring operations plus exact halving, so
//! the same construction runs over [`Dyadic`], arbitrary rationals and
//! IEEE floats.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::dyadic::Dyadic;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Multiplication by `2^k`; exact for the exact types.
    fn mul_pow2(&self, k: i32) -> Self;

    fn approx_f64(&self) -> f64;

    fn halve(&self) -> Self {
        self.mul_pow2(-1)
    }

    fn double(&self) -> Self {
        self.mul_pow2(1)
    }

    /// `self * k` for a small integer `k`.
    fn scale_int(&self, k: i64) -> Self {
        let mut acc = Self::zero();
        let mut base = if k < 0 { -self.clone() } else { self.clone() };
        let mut k = k.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc + base.clone();
            }
            base = base.double();
            k >>= 1;
        }
        acc
    }
}

impl Scalar for Dyadic {
    fn mul_pow2(&self, k: i32) -> Self {
        Dyadic::mul_pow2(self, k as i64)
    }

    fn approx_f64(&self) -> f64 {
        self.to_f64()
    }
}

impl Scalar for BigRational {
    fn mul_pow2(&self, k: i32) -> Self {
        let p = BigInt::one() << k.unsigned_abs() as u64;
        if k >= 0 {
            self * BigRational::from_integer(p)
        } else {
            self / BigRational::from_integer(p)
        }
    }

    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn mul_pow2(&self, k: i32) -> Self {
        self * 2f64.powi(k)
    }

    fn approx_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn mul_pow2(&self, k: i32) -> Self {
        self * 2f32.powi(k)
    }

    fn approx_f64(&self) -> f64 {
        *self as f64
    }
}
