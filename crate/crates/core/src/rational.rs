//! Exact rationals over unbounded integers.
//!
//! [`Rational`] is always kept in canonical form: the denominator is
//! positive and shares no factor with the numerator. Equality is therefore
//! structural, and the textual form `p/q` is unique for every value, which
//! is what makes certificates and CLI output byte-stable.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse {input:?} as a rational (expected [-]digits[/digits] or [-]digits[.digits])")]
    Parse { input: String },
}

/// An exact fraction `numerator / denominator` in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `num / den` in canonical form. The sign ends up on the numerator.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, RationalError> {
        let den = den.into();
        if den.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    /// Shorthand for small literals; panics on a zero denominator.
    pub fn frac(num: i64, den: i64) -> Self {
        Self::new(num, den).expect("Rational::frac with zero denominator")
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `2^-n`.
    pub fn pow2_neg(n: u32) -> Self {
        Rational(BigRational::new(BigInt::one(), BigInt::one() << n))
    }

    /// `2^n`.
    pub fn pow2(n: u32) -> Self {
        Rational::integer(BigInt::one() << n)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    /// Always positive.
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Exact quotient; `None` when dividing by zero.
    pub fn checked_div(&self, rhs: &Rational) -> Option<Rational> {
        if rhs.is_zero() {
            None
        } else {
            Some(Rational(&self.0 / &rhs.0))
        }
    }

    /// Exact division by a positive integer.
    pub fn div_int(&self, d: u64) -> Rational {
        assert!(d > 0, "division by zero");
        Rational(&self.0 / BigRational::from_integer(BigInt::from(d)))
    }

    /// `(self + other) / 2`.
    pub fn midpoint(&self, other: &Rational) -> Rational {
        (self + other).div_int(2)
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        self.0.numer().div_floor(self.0.denom())
    }

    /// The sign of `self.num * other.den - other.num * self.den`.
    pub fn cross_compare(&self, other: &Rational) -> Ordering {
        let lhs = self.numer() * other.denom();
        let rhs = other.numer() * self.denom();
        lhs.cmp(&rhs)
    }

    /// Canonical text with the denominator always present: `p/q`.
    pub fn to_canonical_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_digits(s: &str) -> Option<BigUint> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigUint::from_str(s).ok()
}

impl FromStr for Rational {
    type Err = RationalError;

    /// Accepts `p`, `p/q` and finite decimals `d.ddd`, each with an optional
    /// leading `-`. Decimals are converted exactly.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || RationalError::Parse {
            input: text.to_string(),
        };
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let sign = if negative { Sign::Minus } else { Sign::Plus };

        if let Some((num, den)) = body.split_once('/') {
            let num = parse_digits(num).ok_or_else(bad)?;
            let den = parse_digits(den).ok_or_else(bad)?;
            return Rational::new(BigInt::from_biguint(sign, num), BigInt::from(den));
        }
        if let Some((whole, fraction)) = body.split_once('.') {
            let whole = parse_digits(whole).ok_or_else(bad)?;
            let fraction_digits = parse_digits(fraction).ok_or_else(bad)?;
            let scale = BigUint::from(10u32).pow(fraction.len() as u32);
            let num = whole * &scale + fraction_digits;
            return Rational::new(BigInt::from_biguint(sign, num), BigInt::from(scale));
        }
        let num = parse_digits(body).ok_or_else(bad)?;
        Ok(Rational::integer(BigInt::from_biguint(sign, num)))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::integer(n)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }

        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }

        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// The three field operations exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

pub fn arith(a: &Rational, b: &Rational, op: ArithOp) -> Rational {
    match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
    }
}
