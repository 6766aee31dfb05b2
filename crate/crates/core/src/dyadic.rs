//! Exact dyadic rationals `a / 2^e`.
//!
//! Every probability the trapdoor channel produces is `0` or a power of
//! one half, and the inverse matrices, entropy vectors and Lagrange weights
//! built from them stay inside the dyadics. Keeping a single exact type for
//! all of them turns the whole bound derivation into equality checks.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A number `numerator / 2^exponent`.
///
/// Normalized: zero is stored as `0 / 2^0`, and a positive exponent implies
/// an odd numerator. Equality and hashing are therefore structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: BigInt,
    exponent: u32,
}

impl Dyadic {
    pub fn new(numerator: impl Into<BigInt>, exponent: u32) -> Self {
        let mut d = Dyadic {
            numerator: numerator.into(),
            exponent,
        };
        d.normalize();
        d
    }

    pub fn from_integer(value: i64) -> Self {
        Dyadic::new(value, 0)
    }

    /// `2^k` for any integer `k`.
    pub fn pow2(k: i64) -> Self {
        if k >= 0 {
            Dyadic {
                numerator: BigInt::one() << (k as u64),
                exponent: 0,
            }
        } else {
            Dyadic {
                numerator: BigInt::one(),
                exponent: k.unsigned_abs() as u32,
            }
        }
    }

    /// One half.
    pub fn half() -> Self {
        Dyadic::pow2(-1)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        if self.exponent == 0 {
            return;
        }
        let tz = self.numerator.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exponent as u64);
        if shift > 0 {
            self.numerator >>= shift;
            self.exponent -= shift as u32;
        }
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.numerator.is_zero() {
            return Dyadic::zero();
        }
        if k >= 0 {
            let k = k as u64;
            let e = self.exponent as u64;
            if k <= e {
                Dyadic {
                    numerator: self.numerator.clone(),
                    exponent: (e - k) as u32,
                }
            } else {
                Dyadic {
                    numerator: &self.numerator << (k - e),
                    exponent: 0,
                }
            }
        } else {
            // only an even integer numerator can need renormalizing
            Dyadic::new(
                self.numerator.clone(),
                self.exponent + k.unsigned_abs() as u32,
            )
        }
    }

    /// Returns `k` when `self == 2^k`.
    pub fn log2_exact(&self) -> Option<i64> {
        if self.numerator.sign() != Sign::Plus {
            return None;
        }
        if self.exponent > 0 {
            return if self.numerator.is_one() {
                Some(-(self.exponent as i64))
            } else {
                None
            };
        }
        let tz = self.numerator.trailing_zeros()?;
        if self.numerator.bits() == tz + 1 {
            Some(tz as i64)
        } else {
            None
        }
    }

    pub fn is_negative(&self) -> bool {
        self.numerator.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.numerator.is_positive()
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            numerator: self.numerator.abs(),
            exponent: self.exponent,
        }
    }

    /// Returns the value as an integer if it has no fractional part.
    pub fn to_integer(&self) -> Option<&BigInt> {
        (self.exponent == 0).then_some(&self.numerator)
    }

    /// Nearest `f64`, accurate for numerators and exponents far beyond the
    /// range where a plain `to_f64() * 2^-e` would overflow.
    pub fn to_f64(&self) -> f64 {
        if self.numerator.is_zero() {
            return 0.0;
        }
        let bits = self.numerator.bits();
        let (mantissa, shift) = if bits > 64 {
            let drop = bits - 64;
            (&self.numerator >> drop, drop as i64)
        } else {
            (self.numerator.clone(), 0)
        };
        let m = mantissa.to_f64().unwrap_or(f64::NAN);
        scale_pow2(m, shift - self.exponent as i64)
    }

    /// `log2` of a positive value, without going through `to_f64`.
    pub fn log2(&self) -> f64 {
        if !self.is_positive() {
            return f64::NAN;
        }
        let bits = self.numerator.bits();
        let (top, shift) = if bits > 64 {
            let drop = bits - 64;
            ((&self.numerator >> drop).to_f64().unwrap(), drop as f64)
        } else {
            (self.numerator.to_f64().unwrap(), 0.0)
        };
        top.log2() + shift - self.exponent as f64
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            self.numerator.clone(),
            BigInt::one() << self.exponent as u64,
        )
    }

    /// Converts a rational whose reduced denominator is a power of two.
    pub fn from_rational(r: &BigRational) -> Option<Self> {
        let denom = r.denom();
        let tz = denom.trailing_zeros()?;
        if denom.bits() != tz + 1 {
            return None;
        }
        Some(Dyadic::new(r.numer().clone(), tz as u32))
    }

    /// Canonical text form `a/2^e`, or `0`.
    pub fn to_canonical(&self) -> String {
        if self.numerator.is_zero() {
            "0".to_string()
        } else {
            format!("{}/2^{}", self.numerator, self.exponent)
        }
    }

    /// Parses the canonical form. Plain integers are also accepted.
    pub fn parse_canonical(s: &str) -> Result<Self, Error> {
        let bad = || Error::ParseDyadic(s.to_string());
        let s_trim = s.trim();
        match s_trim.split_once('/') {
            None => {
                let n: BigInt = s_trim.parse().map_err(|_| bad())?;
                Ok(Dyadic::new(n, 0))
            }
            Some((num, den)) => {
                let exp = den.strip_prefix("2^").ok_or_else(bad)?;
                if exp.starts_with('+') {
                    return Err(bad());
                }
                let n: BigInt = num.parse().map_err(|_| bad())?;
                let e: u32 = exp.parse().map_err(|_| bad())?;
                Ok(Dyadic::new(n, e))
            }
        }
    }
}

fn scale_pow2(mut x: f64, mut k: i64) -> f64 {
    while k > 1000 {
        x *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        x *= 2f64.powi(-1000);
        k += 1000;
    }
    x * 2f64.powi(k as i32)
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl Zero for Dyadic {
    fn zero() -> Self {
        Dyadic {
            numerator: BigInt::zero(),
            exponent: 0,
        }
    }

    fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }
}

impl One for Dyadic {
    fn one() -> Self {
        Dyadic {
            numerator: BigInt::one(),
            exponent: 0,
        }
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_integer(v)
    }
}

impl From<BigInt> for Dyadic {
    fn from(v: BigInt) -> Self {
        Dyadic::new(v, 0)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent) as u64;
        let b = &other.numerator << (e - other.exponent) as u64;
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_ref(a: &Dyadic, b: &Dyadic) -> Dyadic {
    if a.numerator.is_zero() {
        return b.clone();
    }
    if b.numerator.is_zero() {
        return a.clone();
    }
    let numerator = match a.exponent.cmp(&b.exponent) {
        Ordering::Equal => &a.numerator + &b.numerator,
        Ordering::Less => (&a.numerator << (b.exponent - a.exponent) as u64) + &b.numerator,
        Ordering::Greater => &a.numerator + (&b.numerator << (a.exponent - b.exponent) as u64),
    };
    Dyadic::new(numerator, a.exponent.max(b.exponent))
}

fn mul_ref(a: &Dyadic, b: &Dyadic) -> Dyadic {
    if a.numerator.is_zero() || b.numerator.is_zero() {
        return Dyadic::zero();
    }
    Dyadic::new(&a.numerator * &b.numerator, a.exponent + b.exponent)
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            numerator: -self.numerator,
            exponent: self.exponent,
        }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            numerator: -&self.numerator,
            exponent: self.exponent,
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: &Dyadic) -> Dyadic {
                $body(self, rhs)
            }
        }
        impl $trait<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: &Dyadic) -> Dyadic {
                $body(&self, rhs)
            }
        }
        impl $trait<Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                $body(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, |a: &Dyadic, b: &Dyadic| add_ref(a, &-b));
forward_binop!(Mul, mul, mul_ref);

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = add_ref(self, rhs);
    }
}

impl AddAssign for Dyadic {
    fn add_assign(&mut self, rhs: Dyadic) {
        *self = add_ref(self, &rhs);
    }
}

impl SubAssign<&Dyadic> for Dyadic {
    fn sub_assign(&mut self, rhs: &Dyadic) {
        *self = add_ref(self, &-rhs);
    }
}

impl MulAssign<&Dyadic> for Dyadic {
    fn mul_assign(&mut self, rhs: &Dyadic) {
        *self = mul_ref(self, rhs);
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl Product for Dyadic {
    fn product<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::one(), |acc, x| acc * x)
    }
}

/// Human-readable reduced fraction: `5/2`, `-3/4`, `7`.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            let denom = BigInt::one() << self.exponent as u64;
            write!(f, "{}/{}", self.numerator, denom)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({})", self.to_canonical())
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Dyadic::parse_canonical(s)
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_canonical())
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Dyadic::parse_canonical(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(n: i64, e: u32) -> Dyadic {
        Dyadic::new(n, e)
    }

    #[test]
    fn normalizes_on_construction() {
        assert_eq!(d(4, 3), d(1, 1));
        assert_eq!(d(0, 7).exponent(), 0);
        assert_eq!(d(6, 1), d(3, 0));
        assert_eq!(d(4, 0).numerator(), &BigInt::from(4));
    }

    #[test]
    fn arithmetic_small_cases() {
        assert_eq!(d(1, 1) + d(1, 1), Dyadic::one());
        assert_eq!(d(1, 2) - d(1, 1), d(-1, 2));
        assert_eq!(d(3, 1) * d(1, 2), d(3, 3));
        assert_eq!(-d(3, 1), d(-3, 1));
        assert_eq!(d(5, 1).mul_pow2(1), d(5, 0));
        assert_eq!(d(5, 0).mul_pow2(-2), d(5, 2));
        assert_eq!(d(4, 0).mul_pow2(-1), d(2, 0));
        assert_eq!(Dyadic::pow2(3), d(8, 0));
        assert_eq!(Dyadic::pow2(-3), d(1, 3));
    }

    #[test]
    fn exact_log2() {
        assert_eq!(d(1, 3).log2_exact(), Some(-3));
        assert_eq!(d(8, 0).log2_exact(), Some(3));
        assert_eq!(Dyadic::one().log2_exact(), Some(0));
        assert_eq!(d(3, 2).log2_exact(), None);
        assert_eq!(d(-1, 1).log2_exact(), None);
        assert_eq!(Dyadic::zero().log2_exact(), None);
    }

    #[test]
    fn ordering_across_exponents() {
        assert!(d(1, 1) < d(3, 2));
        assert!(d(-3, 1) < d(-1, 0));
        assert_eq!(d(2, 2).cmp(&d(1, 1)), Ordering::Equal);
    }

    #[test]
    fn float_conversions_survive_huge_values() {
        let big = Dyadic::new(BigInt::from(5).pow(400), 300);
        let expected = 400.0 * 5f64.log2() - 300.0;
        assert!((big.log2() - expected).abs() < 1e-9);
        assert_eq!(d(3, 2).to_f64(), 0.75);
        assert!((d(5, 1).log2() - 2.5f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn canonical_text() {
        assert_eq!(d(1, 1).to_canonical(), "1/2^1");
        assert_eq!(Dyadic::zero().to_canonical(), "0");
        assert_eq!(d(-3, 1).to_canonical(), "-3/2^1");
        assert_eq!(Dyadic::one().to_canonical(), "1/2^0");
        assert_eq!(d(5, 1).to_string(), "5/2");
        assert!(Dyadic::parse_canonical("1/3").is_err());
        assert!(Dyadic::parse_canonical("x/2^1").is_err());
        assert!(Dyadic::parse_canonical("").is_err());
        assert_eq!(Dyadic::parse_canonical("12").unwrap(), d(12, 0));
    }

    #[test]
    fn rational_round_trip() {
        let r = d(-7, 5).to_rational();
        assert_eq!(Dyadic::from_rational(&r), Some(d(-7, 5)));
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(Dyadic::from_rational(&third), None);
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (-1_000_000i64..1_000_000, 0u32..40).prop_map(|(n, e)| Dyadic::new(n, e))
    }

    fn is_normal(x: &Dyadic) -> bool {
        if x.numerator().is_zero() {
            x.exponent() == 0
        } else {
            x.exponent() == 0 || x.numerator().trailing_zeros() == Some(0)
        }
    }

    proptest! {
        #[test]
        fn ring_ops_preserve_normalization(a in arb_dyadic(), b in arb_dyadic()) {
            prop_assert!(is_normal(&(&a + &b)));
            prop_assert!(is_normal(&(&a - &b)));
            prop_assert!(is_normal(&(&a * &b)));
        }

        #[test]
        fn addition_is_associative(a in arb_dyadic(), b in arb_dyadic(), c in arb_dyadic()) {
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
        }

        #[test]
        fn agrees_with_rationals(a in arb_dyadic(), b in arb_dyadic()) {
            prop_assert_eq!((&a * &b).to_rational(), a.to_rational() * b.to_rational());
            prop_assert_eq!((&a - &b).to_rational(), a.to_rational() - b.to_rational());
            prop_assert_eq!(a.cmp(&b), a.to_rational().cmp(&b.to_rational()));
        }

        #[test]
        fn canonical_round_trip(a in arb_dyadic()) {
            prop_assert_eq!(Dyadic::parse_canonical(&a.to_canonical()).unwrap(), a);
        }
    }
}
