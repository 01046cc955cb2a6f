//! Exact fixed-point arithmetic on the unit circle.
//!
//! An [`Angle`] is a dyadic rational `num / 2^P` in `[0, 1)`. Products with
//! integers and sums are exact modulo 1, so every fractional-part distance
//! [`FracDistance`] computed here is the exact value for the represented
//! coefficients, with no rounding ambiguity in comparisons.

pub mod bound;
pub mod constants;
pub mod fixed;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use bound::{parse_rational, ratio, rational_from_f64, PowerBound};
pub use constants::NamedConstant;
pub use fixed::Fixed;

use crate::error::{Error, Result};

/// A point of `R/Z` represented as `numerator / 2^precision`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Angle {
    bits: Fixed,
}

impl Angle {
    pub fn zero(prec: u32) -> Result<Self> {
        check_precision(prec)?;
        Ok(Angle {
            bits: Fixed::zero(prec),
        })
    }

    /// Requires `numerator < 2^prec`.
    pub fn new(numerator: BigUint, prec: u32) -> Result<Self> {
        check_precision(prec)?;
        if numerator.bits() > prec as u64 {
            return Err(Error::Domain(format!("numerator {numerator} does not fit {prec} bits")));
        }
        Ok(Angle {
            bits: Fixed::from_biguint(&numerator, prec),
        })
    }

    /// Reduces an arbitrary integer numerator modulo `2^prec`.
    pub fn from_numerator_mod(numerator: &BigInt, prec: u32) -> Result<Self> {
        check_precision(prec)?;
        let m = BigInt::one() << prec;
        let r = numerator.mod_floor(&m);
        Ok(Angle {
            bits: Fixed::from_biguint(r.magnitude(), prec),
        })
    }

    pub fn from_fixed(bits: Fixed) -> Self {
        Angle { bits }
    }

    /// Nearest `P`-bit dyadic to `(a mod q) / q`, ties rounded up.
    pub fn from_rational(a: &BigInt, q: &BigInt, prec: u32) -> Result<Self> {
        check_precision(prec)?;
        if q.is_zero() {
            return Err(Error::Domain("denominator q must be nonzero".into()));
        }
        let (a, q) = if q.is_negative() {
            (-a, -q)
        } else {
            (a.clone(), q.clone())
        };
        let r = a.mod_floor(&q);
        // round(r 2^P / q) = floor((2 r 2^P + q) / 2q)
        let num: BigInt = ((r << (prec + 1)) + &q) / (q << 1);
        Self::from_numerator_mod(&num, prec)
    }

    /// Nearest `P`-bit dyadic to a rational.
    pub fn from_big_rational(x: &BigRational, prec: u32) -> Result<Self> {
        Self::from_rational(x.numer(), x.denom(), prec)
    }

    pub fn from_named(c: NamedConstant, prec: u32) -> Result<Self> {
        check_precision(prec)?;
        Ok(Angle {
            bits: Fixed::from_biguint(&c.fraction_bits(prec), prec),
        })
    }

    /// Parses `a/b`, a decimal such as `0.333` or `-1.25`, or a named
    /// constant (`pi`, `e`, `phi`, `sqrt2`).
    pub fn parse(s: &str, prec: u32) -> Result<Self> {
        let t = s.trim();
        if let Some(c) = NamedConstant::from_name(t) {
            return Self::from_named(c, prec);
        }
        let r = parse_rational(t)?;
        Self::from_big_rational(&r, prec)
    }

    pub fn numerator(&self) -> BigUint {
        self.bits.to_biguint()
    }

    pub fn precision(&self) -> u32 {
        self.bits.precision()
    }

    pub fn fixed(&self) -> &Fixed {
        &self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits.is_zero()
    }

    /// `x * n^j mod 1`.
    pub fn mul_pow_mod1(&self, n: u64, j: u32) -> Angle {
        let mut out = self.bits.clone();
        for _ in 0..j {
            out.mul_small_assign(n);
        }
        Angle { bits: out }
    }

    /// `x * n^j mod 1` for an arbitrary-size `n`.
    pub fn mul_pow_mod1_big(&self, n: &BigUint, j: u32) -> Angle {
        let p = self.precision();
        let base = Fixed::from_biguint(n, p);
        let mut power = Fixed::from_u64(1, p);
        for _ in 0..j {
            power.mul_assign(&base);
        }
        let mut out = self.bits.clone();
        out.mul_assign(&power);
        Angle { bits: out }
    }

    /// `m x mod 1`.
    pub fn scale(&self, m: u64) -> Angle {
        self.mul_pow_mod1(m, 1)
    }

    /// Sum modulo 1; precisions must agree.
    pub fn add(&self, other: &Angle) -> Result<Angle> {
        same_precision(self, other)?;
        let mut out = self.bits.clone();
        out.add_assign(&other.bits);
        Ok(Angle { bits: out })
    }

    /// `-x mod 1`.
    pub fn neg(&self) -> Angle {
        Angle { bits: self.bits.neg() }
    }

    pub fn frac_distance(&self) -> FracDistance {
        FracDistance {
            bits: self.bits.distance(),
        }
    }

    /// Re-expresses at another precision: exact when growing, nearest when
    /// shrinking.
    pub fn with_precision(&self, prec: u32) -> Result<Angle> {
        let p = self.precision();
        match prec.cmp(&p) {
            Ordering::Equal => Ok(self.clone()),
            Ordering::Greater => Angle::new(self.numerator() << (prec - p), prec),
            Ordering::Less => Angle::from_big_rational(&self.to_rational(), prec),
        }
    }

    /// The represented value as an exact rational in `[0, 1)`.
    pub fn to_rational(&self) -> BigRational {
        bound::fixed_to_rational(&self.bits)
    }

    pub fn to_f64(&self) -> f64 {
        self.bits.to_f64()
    }
}

fn check_precision(prec: u32) -> Result<()> {
    if prec == 0 {
        Err(Error::Domain("precision must be at least 1 bit".into()))
    } else {
        Ok(())
    }
}

fn same_precision(a: &Angle, b: &Angle) -> Result<()> {
    if a.precision() == b.precision() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "precision mismatch: {} vs {} bits",
            a.precision(),
            b.precision()
        )))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator(), self.precision())
    }
}

#[derive(Serialize, Deserialize)]
struct DyadicRepr {
    num: String,
    prec: u32,
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DyadicRepr {
            num: self.numerator().to_string(),
            prec: self.precision(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DyadicRepr::deserialize(d)?;
        let num: BigUint = r.num.parse().map_err(serde::de::Error::custom)?;
        Angle::new(num, r.prec).map_err(serde::de::Error::custom)
    }
}

/// Distance to the nearest integer, an exact dyadic in `[0, 1/2]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FracDistance {
    bits: Fixed,
}

impl FracDistance {
    /// Wraps a residue already known to be at most 1/2.
    pub(crate) fn from_distance_bits(bits: Fixed) -> Self {
        debug_assert!(!bits.at_least_half() || bits == half_of(bits.precision()));
        FracDistance { bits }
    }

    pub fn zero(prec: u32) -> Self {
        FracDistance {
            bits: Fixed::zero(prec),
        }
    }

    pub fn numerator(&self) -> BigUint {
        self.bits.to_biguint()
    }

    pub fn precision(&self) -> u32 {
        self.bits.precision()
    }

    pub fn fixed(&self) -> &Fixed {
        &self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits.is_zero()
    }

    pub fn to_rational(&self) -> BigRational {
        bound::fixed_to_rational(&self.bits)
    }

    pub fn to_f64(&self) -> f64 {
        self.bits.to_f64()
    }

    /// Exact `m * self` as a rational (may exceed 1/2).
    pub fn times(&self, m: u64) -> BigRational {
        self.to_rational() * BigRational::from_integer(BigInt::from(m))
    }
}

fn half_of(prec: u32) -> Fixed {
    Fixed::from_biguint(&(BigUint::one() << (prec - 1)), prec)
}

impl PartialOrd for FracDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FracDistance {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bits.cmp(&other.bits)
    }
}

impl fmt::Display for FracDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6e}", self.to_f64())
    }
}

#[derive(Serialize, Deserialize)]
struct DistanceRepr {
    num: String,
    prec: u32,
    approx: f64,
}

impl Serialize for FracDistance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DistanceRepr {
            num: self.numerator().to_string(),
            prec: self.precision(),
            approx: self.to_f64(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FracDistance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DistanceRepr::deserialize(d)?;
        let num: BigUint = r.num.parse().map_err(serde::de::Error::custom)?;
        if r.prec == 0 || (num.clone() << 1u32) > (BigUint::one() << r.prec) {
            return Err(serde::de::Error::custom("distance must lie in [0, 1/2]"));
        }
        Ok(FracDistance {
            bits: Fixed::from_biguint(&num, r.prec),
        })
    }
}

/// Nearest `P`-bit dyadic to `(a mod q) / q`.
pub fn angle_from_rational(a: i64, q: u64, prec: u32) -> Result<Angle> {
    Angle::from_rational(&BigInt::from(a), &BigInt::from(q), prec)
}

/// `x * n^j mod 1`, exact.
pub fn mul_pow_mod1(x: &Angle, n: u64, j: u32) -> Angle {
    x.mul_pow_mod1(n, j)
}

/// `min(x, 1 - x)`.
pub fn frac_distance(x: &Angle) -> FracDistance {
    x.frac_distance()
}

/// Nearest integer to `q * x` for `x` in `[0, 1)`, i.e. `round(q num / 2^P)`.
pub(crate) fn nearest_integer_multiple(x: &Angle, q: u64) -> BigInt {
    let p = x.precision();
    let prod = x.numerator() * BigUint::from(q);
    let rounded = (prod + (BigUint::one() << (p - 1))) >> p;
    BigInt::from_biguint(Sign::Plus, rounded)
}

/// `|q x - a|` as an exact rational.
pub(crate) fn abs_residual(x: &Angle, q: u64, a: i64) -> BigRational {
    let p = x.precision();
    let lhs = BigInt::from(x.numerator()) * BigInt::from(q);
    let rhs = BigInt::from(a) << p;
    BigRational::new((lhs - rhs).abs(), BigInt::one() << p)
}

/// Bits needed for exact `frac_distance` comparisons at the given scale.
pub fn certifying_precision(k: u32, n: u64, q: u64) -> u32 {
    k * bound::ceil_log2(n.max(1)) + bound::ceil_log2(q.max(1)) + 64
}
