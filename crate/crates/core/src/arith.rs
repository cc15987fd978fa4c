//! Exact rational and modular arithmetic.
//!
//! Every quantity in the crate (degrees, Kawamata sums, Euler characteristics)
//! is an exact fraction. [`Rational`] keeps an `i128` numerator and denominator
//! in lowest terms and uses checked operations throughout: an overflow panics
//! instead of wrapping, so a table can never be silently corrupted.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: i128, b: i128) -> i128 {
    if a == 0 || b == 0 {
        return 0;
    }
    let g = gcd(a, b);
    (a / g).checked_mul(b).map(i128::abs).expect("lcm overflow")
}

/// Mathematical remainder: always in `[0, r)` for `r > 0`.
pub fn modulo(x: i64, r: i64) -> i64 {
    x.rem_euclid(r)
}

/// An exact fraction in lowest terms with a positive denominator.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i128,
    den: i128,
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    /// Builds `num/den` and normalizes it. Panics on a zero denominator.
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = n.checked_neg().expect("rational overflow");
            d = d.checked_neg().expect("rational overflow");
        }
        Rational { num: n, den: d }
    }

    pub fn from_int(n: i128) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    /// The integer value, if this is an integer.
    pub fn to_integer(&self) -> Option<i128> {
        self.is_integer().then_some(self.num)
    }

    pub fn floor(&self) -> i128 {
        self.num.div_euclid(self.den)
    }

    pub fn ceil(&self) -> i128 {
        -(-self.num).div_euclid(self.den)
    }

    pub fn abs(&self) -> Self {
        Rational {
            num: self.num.checked_abs().expect("rational overflow"),
            den: self.den,
        }
    }

    pub fn recip(&self) -> Self {
        assert!(self.num != 0, "reciprocal of zero");
        Rational::new(self.den, self.num)
    }

    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        let g = gcd(self.den, rhs.den);
        let l = (self.den / g).checked_mul(rhs.den)?;
        let a = self.num.checked_mul(l / self.den)?;
        let b = rhs.num.checked_mul(l / rhs.den)?;
        Some(Rational::new(a.checked_add(b)?, l))
    }

    pub fn checked_mul(self, rhs: Self) -> Option<Self> {
        // cross-reduce first to keep intermediates small
        let g1 = gcd(self.num, rhs.den).max(1);
        let g2 = gcd(rhs.num, self.den).max(1);
        let n = (self.num / g1).checked_mul(rhs.num / g2)?;
        let d = (self.den / g2).checked_mul(rhs.den / g1)?;
        Some(Rational::new(n, d))
    }

    pub fn pow(self, e: u32) -> Self {
        (0..e).fold(Rational::ONE, |acc, _| acc * self)
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n as i128)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::from_int(n as i128)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("rational overflow in add")
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Self {
        Rational {
            num: self.num.checked_neg().expect("rational overflow in neg"),
            den: self.den,
        }
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("rational overflow in mul")
    }
}

impl Div for Rational {
    type Output = Rational;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::ZERO, |a, b| a + b)
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let l = self
            .num
            .checked_mul(other.den)
            .expect("rational overflow in cmp");
        let r = other
            .num
            .checked_mul(self.den)
            .expect("rational overflow in cmp");
        l.cmp(&r)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `n` or `n/d`; only the numerator may carry a sign.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid rational {s:?}"));
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (s, None),
        };
        let num: i128 = n.trim().parse().map_err(|_| bad())?;
        let den: i128 = match d {
            Some(d) => {
                let d = d.trim();
                if d.starts_with(['+', '-']) {
                    return Err(bad());
                }
                d.parse().map_err(|_| bad())?
            }
            None => 1,
        };
        if den == 0 {
            return Err(bad());
        }
        Ok(Rational::new(num, den))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A residue class modulo `r`, stored by its representative in `[0, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    value: i64,
    modulus: i64,
}

impl Residue {
    pub fn new(x: i64, modulus: i64) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        Residue {
            value: modulo(x, modulus),
            modulus,
        }
    }

    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    fn same_modulus(&self, other: &Residue) {
        assert_eq!(self.modulus, other.modulus, "mismatched moduli");
    }
}

impl Add for Residue {
    type Output = Residue;
    fn add(self, rhs: Self) -> Self {
        self.same_modulus(&rhs);
        Residue::new(self.value + rhs.value, self.modulus)
    }
}

impl Mul for Residue {
    type Output = Residue;
    fn mul(self, rhs: Self) -> Self {
        self.same_modulus(&rhs);
        Residue::new(self.value * rhs.value, self.modulus)
    }
}

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Self {
        Residue::new(-self.value, self.modulus)
    }
}

/// Inverse of `x` modulo `r` via the extended Euclidean algorithm.
pub fn mod_inverse(x: i64, r: i64) -> Result<Residue> {
    assert!(r >= 2, "modulus must be at least 2");
    let a = modulo(x, r);
    let (mut old_r, mut rr) = (a, r);
    let (mut old_s, mut s) = (1i64, 0i64);
    while rr != 0 {
        let quot = old_r / rr;
        (old_r, rr) = (rr, old_r - quot * rr);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return Err(Error::NotInvertible { x, r });
    }
    Ok(Residue::new(old_s, r))
}

/// Representative of `{a, -a} mod r` lying in `[1, r/2]`.
pub fn canonical_orientation(a: i64, r: i64) -> Result<i64> {
    assert!(r >= 2, "modulus must be at least 2");
    let a = modulo(a, r);
    if a == 0 || gcd(a as i128, r as i128) != 1 {
        return Err(Error::NotCoprime { a, r });
    }
    Ok(a.min(r - a))
}
