//! Exact comparisons against quantities of the form `c * N^e`.
//!
//! Every threshold in the certifying code paths (`N^{-b}`, `N^eps (N/A)^k`,
//! `N^{1 - 1/J + eps}`, ...) has this shape with rational `c` and `e`. A
//! comparison `x <= c N^{p/q}` is decided by raising both sides to the q-th
//! power in big-integer arithmetic, so there is no rounding anywhere. A
//! logarithmic estimate short-circuits comparisons that are not close.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fixed::Fixed;
use crate::error::{Error, Result};

/// Relative slack within which the logarithmic fast path defers to the
/// exact test.
const LN_GUARD: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PowerBound {
    coef: BigRational,
    base: BigUint,
    exp: BigRational,
    ln_value: f64,
}

pub(crate) fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap_or(0) as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX) as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub(crate) fn ln_rational(x: &BigRational) -> f64 {
    let num = x.numer().magnitude();
    let den = x.denom().magnitude();
    ln_biguint(num) - ln_biguint(den)
}

fn rational_to_f64_ln(x: &BigRational) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        ln_rational(&x.abs())
    }
}

impl PowerBound {
    /// `coef * base^exp`; `coef` must be positive and `base >= 1`.
    pub fn new(coef: BigRational, base: u64, exp: BigRational) -> Result<Self> {
        if !coef.is_positive() {
            return Err(Error::Domain(format!("bound coefficient must be positive, got {coef}")));
        }
        if base == 0 {
            return Err(Error::Domain("bound base must be at least 1".into()));
        }
        let ln_value = ln_rational(&coef) + exp.to_f64().unwrap_or(f64::NAN) * (base as f64).ln();
        Ok(PowerBound {
            coef,
            base: BigUint::from(base),
            exp,
            ln_value,
        })
    }

    /// `base^exp`.
    pub fn power(base: u64, exp: BigRational) -> Result<Self> {
        Self::new(BigRational::one(), base, exp)
    }

    pub fn coefficient(&self) -> &BigRational {
        &self.coef
    }

    pub fn exponent(&self) -> &BigRational {
        &self.exp
    }

    /// The same bound scaled by a positive rational.
    pub fn scaled(&self, c: &BigRational) -> Result<Self> {
        let base = self.base.to_u64().expect("base fits u64");
        Self::new(&self.coef * c, base, self.exp.clone())
    }

    /// The same bound multiplied by `base^e`.
    pub fn times_power(&self, e: &BigRational) -> Result<Self> {
        let base = self.base.to_u64().expect("base fits u64");
        Self::new(self.coef.clone(), base, &self.exp + e)
    }

    pub fn ln(&self) -> f64 {
        self.ln_value
    }

    /// Floating-point value, for reports only.
    pub fn to_f64(&self) -> f64 {
        self.ln_value.exp()
    }

    /// Exact test of `x <= self` for a non-negative rational `x`.
    pub fn admits_exact(&self, x: &BigRational) -> bool {
        if !x.is_positive() {
            return true;
        }
        // x <= c N^(p/q)  <=>  (x/c)^q <= N^p  (q > 0)
        let y = x / &self.coef;
        let p = self.exp.numer();
        let q = self.exp.denom().to_u32().expect("exponent denominator fits u32");
        let yn = y.numer().magnitude().pow(q);
        let yd = y.denom().magnitude().pow(q);
        let p_abs = p.magnitude().to_u32().expect("exponent numerator fits u32");
        let np = self.base.pow(p_abs);
        if p.is_negative() {
            yn * np <= yd
        } else {
            yn <= yd * np
        }
    }

    /// `x <= self` for a rational, with the logarithmic short cut.
    pub fn admits(&self, x: &BigRational) -> bool {
        if !x.is_positive() {
            return true;
        }
        match self.quick(rational_to_f64_ln(x)) {
            Some(v) => v,
            None => self.admits_exact(x),
        }
    }

    /// `x <= self` for a dyadic residue `x / 2^P` in `[0, 1)`.
    pub fn admits_fixed(&self, x: &Fixed) -> bool {
        if x.is_zero() {
            return true;
        }
        match self.quick(x.ln()) {
            Some(v) => v,
            None => self.admits_exact(&fixed_to_rational(x)),
        }
    }

    /// `n <= self` for an integer.
    pub fn admits_int(&self, n: &BigUint) -> bool {
        if n.is_zero() {
            return true;
        }
        match self.quick(ln_biguint(n)) {
            Some(v) => v,
            None => self.admits_exact(&BigRational::from_integer(BigInt::from(n.clone()))),
        }
    }

    fn quick(&self, ln_x: f64) -> Option<bool> {
        if !self.ln_value.is_finite() || ln_x.is_nan() {
            return None;
        }
        let slack = LN_GUARD * (1.0 + self.ln_value.abs());
        if ln_x < self.ln_value - slack {
            Some(true)
        } else if ln_x > self.ln_value + slack {
            Some(false)
        } else {
            None
        }
    }

    /// Largest integer `m` with `m <= self`.
    pub fn floor(&self) -> BigUint {
        let one = BigUint::one();
        if !self.admits_int(&one) {
            return BigUint::zero();
        }
        // Gallop upward for an upper bracket, then bisect.
        let guess = self.to_f64();
        let mut lo = if guess.is_finite() && (1.0..1e300).contains(&guess) {
            let g = BigUint::from(((guess * (1.0 - 1e-6)).floor().max(1.0)) as u128);
            if self.admits_int(&g) {
                g
            } else {
                one.clone()
            }
        } else {
            one.clone()
        };
        let mut step = BigUint::from(guess.clamp(1.0, 1e18) as u64 / 1_000_000 + 1);
        let mut hi = &lo + &step;
        while self.admits_int(&hi) {
            lo = hi.clone();
            step <<= 1;
            hi = &lo + &step;
        }
        // invariant: lo admitted, hi not
        while &hi - &lo > one {
            let mid: BigUint = (&lo + &hi) >> 1;
            if self.admits_int(&mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `floor` as `u64`, saturating.
    pub fn floor_u64(&self) -> u64 {
        self.floor().to_u64().unwrap_or(u64::MAX)
    }
}

impl std::fmt::Display for PowerBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coef.is_one() {
            write!(f, "{}^({})", self.base, self.exp)
        } else {
            write!(f, "({})*{}^({})", self.coef, self.base, self.exp)
        }
    }
}

pub(crate) fn fixed_to_rational(x: &Fixed) -> BigRational {
    BigRational::new(
        BigInt::from(x.to_biguint()),
        BigInt::from(BigUint::one() << x.precision()),
    )
}

/// Exact rational from a finite `f64`.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("not a finite number: {x}")))
}

/// Parses `"0.05"`, `"1/20"`, `"3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let b: BigInt = b
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if b.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(a, b));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if (int_part.is_empty() && frac_part.is_empty())
        || !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::Parse(format!("not a number: {s:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().expect("validated digits")
    };
    let den = num_traits::pow(BigInt::from(10u8), frac_part.len());
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// `ceil(log2 x)` helper used for precision planning.
pub(crate) fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Lowest-terms rational `a/b` from machine integers.
pub fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Greatest common divisor of a list (0 for an empty list).
pub fn gcd_all(xs: &[i64]) -> i64 {
    xs.iter().fold(0i64, |g, &x| g.gcd(&x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("0.05").unwrap(), ratio(1, 20));
        assert_eq!(parse_rational("-1/7").unwrap(), ratio(-1, 7));
        assert_eq!(parse_rational("3").unwrap(), ratio(3, 1));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn exact_power_comparisons() {
        // 10^(11/12) = 8.254...
        let b = PowerBound::power(10, ratio(11, 12)).unwrap();
        assert!(b.admits_exact(&ratio(8254, 1000)));
        assert!(!b.admits_exact(&ratio(8255, 1000)));
        assert_eq!(b.floor(), BigUint::from(8u8));
        assert!((b.to_f64() - 8.254041852680183).abs() < 1e-9);
    }

    #[test]
    fn negative_exponents() {
        // 100^(-1/2) = 1/10 exactly; equality is admitted
        let b = PowerBound::power(100, ratio(-1, 2)).unwrap();
        assert!(b.admits(&ratio(1, 10)));
        assert!(!b.admits(&ratio(1001, 10000)));
        assert_eq!(b.floor(), BigUint::zero());
    }

    #[test]
    fn floor_of_exact_integer_powers() {
        let b = PowerBound::power(10_000, ratio(1, 2)).unwrap();
        assert_eq!(b.floor_u64(), 100);
        let c = PowerBound::new(ratio(3, 1), 2, ratio(40, 1)).unwrap();
        assert_eq!(c.floor_u64(), 3 << 40);
        let d = PowerBound::power(7, ratio(0, 1)).unwrap();
        assert_eq!(d.floor_u64(), 1);
    }

    #[test]
    fn fixed_comparison_agrees_with_exact() {
        let b = PowerBound::power(16, ratio(-1, 2)).unwrap(); // 1/4
        let quarter = Fixed::from_u64(64, 8);
        let above = Fixed::from_u64(65, 8);
        assert!(b.admits_fixed(&quarter));
        assert!(!b.admits_fixed(&above));
    }

    #[test]
    fn non_positive_coefficient_rejected() {
        assert!(PowerBound::new(ratio(0, 1), 10, ratio(1, 1)).is_err());
        assert!(PowerBound::new(ratio(1, 1), 0, ratio(1, 1)).is_err());
    }
}
