//! Named irrational constants evaluated to an arbitrary number of bits.
//!
//! Each routine computes `floor(value * 2^W)` for a working width
//! `W = P + GUARD_BITS` in exact integer arithmetic, then rounds to the
//! nearest `P`-bit dyadic. Only the fractional part is kept.
//!
//! | name    | value mod 1  | method                                         |
//! |---------|--------------|------------------------------------------------|
//! | `pi`    | 0.14159...   | Machin: 16 atan(1/5) - 4 atan(1/239), fixed-point series |
//! | `e`     | 0.71828...   | sum of 1/i! in fixed point                     |
//! | `phi`   | 0.61803...   | (1 + isqrt(5 * 4^W) / 2^W) / 2                 |
//! | `sqrt2` | 0.41421...   | isqrt(2 * 4^W)                                 |
//!
//! Series truncation loses at most one unit per term at width `W`, far below
//! the guard; the returned numerator is within `2^-(P+1) + 2^-(P+40)` of the
//! true fractional part.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

const GUARD_BITS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedConstant {
    Pi,
    E,
    Phi,
    Sqrt2,
}

impl NamedConstant {
    pub const ALL: [NamedConstant; 4] = [
        NamedConstant::Pi,
        NamedConstant::E,
        NamedConstant::Phi,
        NamedConstant::Sqrt2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedConstant::Pi => "pi",
            NamedConstant::E => "e",
            NamedConstant::Phi => "phi",
            NamedConstant::Sqrt2 => "sqrt2",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pi" => Some(NamedConstant::Pi),
            "e" => Some(NamedConstant::E),
            "phi" | "golden" => Some(NamedConstant::Phi),
            "sqrt2" => Some(NamedConstant::Sqrt2),
            _ => None,
        }
    }

    /// The method used, as recorded in output metadata.
    pub fn method(self) -> &'static str {
        match self {
            NamedConstant::Pi => "machin-atan-series",
            NamedConstant::E => "factorial-series",
            NamedConstant::Phi => "integer-sqrt",
            NamedConstant::Sqrt2 => "integer-sqrt",
        }
    }

    /// Nearest `prec`-bit numerator of the fractional part.
    pub fn fraction_bits(self, prec: u32) -> BigUint {
        let w = prec + GUARD_BITS;
        let scaled = match self {
            NamedConstant::Pi => pi_scaled(w),
            NamedConstant::E => e_scaled(w),
            NamedConstant::Phi => phi_scaled(w),
            NamedConstant::Sqrt2 => (BigUint::from(2u8) << (2 * w)).sqrt(),
        };
        let frac = scaled % (BigUint::one() << w);
        let rounded = (frac + (BigUint::one() << (GUARD_BITS - 1))) >> GUARD_BITS;
        rounded % (BigUint::one() << prec)
    }
}

/// `floor(atan(1/x) * 2^w)` up to a few units.
fn atan_inv(x: u32, w: u32) -> BigUint {
    let x2 = BigUint::from(x) * BigUint::from(x);
    let mut power = (BigUint::one() << w) / BigUint::from(x); // 2^w / x^(2i+1)
    let mut sum_pos = BigUint::zero();
    let mut sum_neg = BigUint::zero();
    let mut i: u32 = 0;
    while !power.is_zero() {
        let term = &power / BigUint::from(2 * i + 1);
        if i % 2 == 0 {
            sum_pos += term;
        } else {
            sum_neg += term;
        }
        power /= &x2;
        i += 1;
    }
    sum_pos - sum_neg
}

fn pi_scaled(w: u32) -> BigUint {
    atan_inv(5, w) * BigUint::from(16u8) - atan_inv(239, w) * BigUint::from(4u8)
}

fn e_scaled(w: u32) -> BigUint {
    let mut term = BigUint::one() << w;
    let mut sum = BigUint::zero();
    let mut i: u32 = 1;
    while !term.is_zero() {
        sum += &term;
        term /= BigUint::from(i);
        i += 1;
    }
    sum
}

fn phi_scaled(w: u32) -> BigUint {
    let root5 = (BigUint::from(5u8) << (2 * w)).sqrt();
    ((BigUint::one() << w) + root5) >> 1
}
