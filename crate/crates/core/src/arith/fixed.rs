//! Residues modulo `2^P`, stored as little-endian `u64` limbs.
//!
//! This is the working representation behind [`Angle`](super::Angle): a value
//! `x / 2^P` on the unit circle. Every operation reduces modulo `2^P`, so
//! multiplying by an integer and adding are exact on the circle. No heap
//! allocation happens inside the `*_assign` methods, which is what keeps the
//! exhaustive scans cheap.

use std::cmp::Ordering;

use num_bigint::BigUint;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fixed {
    limbs: Vec<u64>,
    prec: u32,
}

fn limb_count(prec: u32) -> usize {
    prec.div_ceil(64) as usize
}

/// `x * 2^e` without intermediate overflow or underflow.
pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

impl Fixed {
    pub fn zero(prec: u32) -> Self {
        assert!(prec >= 1, "precision must be positive");
        Fixed {
            limbs: vec![0; limb_count(prec)],
            prec,
        }
    }

    /// Reduces `x` modulo `2^prec`.
    pub fn from_biguint(x: &BigUint, prec: u32) -> Self {
        let mut out = Fixed::zero(prec);
        for (slot, d) in out.limbs.iter_mut().zip(x.iter_u64_digits()) {
            *slot = d;
        }
        out.mask();
        out
    }

    pub fn from_u64(x: u64, prec: u32) -> Self {
        let mut out = Fixed::zero(prec);
        out.limbs[0] = x;
        out.mask();
        out
    }

    /// Builds from raw limbs (little-endian), reducing modulo `2^prec`.
    pub fn from_limbs(mut limbs: Vec<u64>, prec: u32) -> Self {
        limbs.resize(limb_count(prec), 0);
        let mut out = Fixed { limbs, prec };
        out.mask();
        out
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut digits = Vec::with_capacity(self.limbs.len() * 2);
        for &l in &self.limbs {
            digits.push(l as u32);
            digits.push((l >> 32) as u32);
        }
        BigUint::new(digits)
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    fn mask(&mut self) {
        let rem = self.prec % 64;
        if rem != 0 {
            if let Some(top) = self.limbs.last_mut() {
                *top &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn set_zero(&mut self) {
        self.limbs.iter_mut().for_each(|l| *l = 0);
    }

    /// Overwrites `self` with `other`; precisions must match.
    pub fn copy_from(&mut self, other: &Fixed) {
        debug_assert_eq!(self.prec, other.prec);
        self.limbs.copy_from_slice(&other.limbs);
    }

    /// `self <- self * m mod 2^P`.
    pub fn mul_small_assign(&mut self, m: u64) {
        let mut carry: u128 = 0;
        for l in self.limbs.iter_mut() {
            let t = (*l as u128) * (m as u128) + carry;
            *l = t as u64;
            carry = t >> 64;
        }
        self.mask();
    }

    /// `self <- self + other mod 2^P`; precisions must match.
    pub fn add_assign(&mut self, other: &Fixed) {
        debug_assert_eq!(self.prec, other.prec);
        let mut carry = false;
        for (a, &b) in self.limbs.iter_mut().zip(other.limbs.iter()) {
            let (s1, c1) = a.overflowing_add(b);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *a = s2;
            carry = c1 || c2;
        }
        self.mask();
    }

    /// `self <- self * other mod 2^P` (truncated schoolbook product).
    pub fn mul_assign(&mut self, other: &Fixed) {
        debug_assert_eq!(self.prec, other.prec);
        let n = self.limbs.len();
        let mut out = vec![0u64; n];
        for i in 0..n {
            let mut carry: u128 = 0;
            let a = self.limbs[i] as u128;
            if a == 0 {
                continue;
            }
            for j in 0..(n - i) {
                let t = a * (other.limbs[j] as u128) + out[i + j] as u128 + carry;
                out[i + j] = t as u64;
                carry = t >> 64;
            }
        }
        self.limbs = out;
        self.mask();
    }

    /// `2^P - x mod 2^P`.
    pub fn neg(&self) -> Fixed {
        let mut out = self.clone();
        out.neg_assign();
        out
    }

    pub fn neg_assign(&mut self) {
        let mut carry = true;
        for l in self.limbs.iter_mut() {
            let (s, c) = (!*l).overflowing_add(carry as u64);
            *l = s;
            carry = c;
        }
        self.mask();
    }

    /// Whether `x / 2^P >= 1/2`.
    pub fn at_least_half(&self) -> bool {
        let bit = self.prec - 1;
        (self.limbs[(bit / 64) as usize] >> (bit % 64)) & 1 == 1
    }

    /// `min(x, 1 - x)` as a residue at the same precision.
    pub fn distance(&self) -> Fixed {
        if self.at_least_half() {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// `distance` written into `out` (no allocation).
    pub fn distance_into(&self, out: &mut Fixed) {
        out.copy_from(self);
        if self.at_least_half() {
            out.neg_assign();
        }
    }

    /// The value scaled to 128 fractional bits: `floor(x * 2^128 / 2^P)`.
    pub fn top_u128(&self) -> u128 {
        let p = self.prec as i64;
        let mut acc: u128 = 0;
        for (i, &l) in self.limbs.iter().enumerate() {
            // limb i contributes l * 2^(64 i) / 2^P * 2^128 = l * 2^(64 i + 128 - P)
            let shift = 64 * i as i64 + 128 - p;
            if shift >= 128 || shift <= -64 {
                continue;
            }
            let v = l as u128;
            acc = acc.wrapping_add(if shift >= 0 { v << shift } else { v >> (-shift) });
        }
        acc
    }

    /// Nearest-ish `f64` of `x / 2^P` (relative error below `2^-52`).
    pub fn to_f64(&self) -> f64 {
        let Some(h) = self.limbs.iter().rposition(|&l| l != 0) else {
            return 0.0;
        };
        let hi = self.limbs[h] as u128;
        let lo = if h > 0 { self.limbs[h - 1] as u128 } else { 0 };
        let v = ((hi << 64) | lo) as f64;
        ldexp(v, 64 * (h as i64 - 1) - self.prec as i64)
    }

    /// Natural logarithm of `x / 2^P`; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        let Some(h) = self.limbs.iter().rposition(|&l| l != 0) else {
            return f64::NEG_INFINITY;
        };
        let hi = self.limbs[h] as u128;
        let lo = if h > 0 { self.limbs[h - 1] as u128 } else { 0 };
        let v = ((hi << 64) | lo) as f64;
        v.ln() + (64 * (h as i64 - 1) - self.prec as i64) as f64 * std::f64::consts::LN_2
    }
}

impl PartialOrd for Fixed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Numeric order for equal precisions; mixed precisions compare exactly by
/// aligning to the larger one.
impl Ord for Fixed {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.prec == other.prec {
            for (a, b) in self.limbs.iter().rev().zip(other.limbs.iter().rev()) {
                match a.cmp(b) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            return Ordering::Equal;
        }
        let (a, b) = (self.to_biguint(), other.to_biguint());
        if self.prec < other.prec {
            (a << (other.prec - self.prec)).cmp(&b)
        } else {
            a.cmp(&(b << (self.prec - other.prec)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(x: &Fixed) -> BigUint {
        x.to_biguint()
    }

    fn modulus(p: u32) -> BigUint {
        BigUint::from(1u8) << p
    }

    #[test]
    fn masks_on_construction() {
        let x = Fixed::from_u64(0xff, 4);
        assert_eq!(x.to_biguint(), BigUint::from(0xfu8));
    }

    #[test]
    fn half_is_its_own_distance() {
        let half = Fixed::from_u64(128, 8);
        assert_eq!(half.distance(), half);
        assert!(half.at_least_half());
    }

    #[test]
    fn top_bits_small_and_large_precision() {
        let x = Fixed::from_u64(1, 1); // 1/2
        assert_eq!(x.top_u128(), 1u128 << 127);
        let y = Fixed::from_biguint(&(BigUint::from(3u8) << 198), 200); // 3/4
        assert_eq!(y.top_u128(), 3u128 << 126);
    }

    #[test]
    fn to_f64_handles_tiny_values() {
        let x = Fixed::from_u64(1, 1500);
        assert_eq!(x.to_f64(), 0.0);
        let y = Fixed::from_u64(3, 700);
        let expect = 3.0 * 2f64.powi(-700);
        assert!((y.to_f64() - expect).abs() <= expect * 1e-15);
        assert!((y.ln() - (3f64.ln() - 700.0 * std::f64::consts::LN_2)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn ring_ops_match_biguint(
            a in proptest::collection::vec(any::<u64>(), 1..5),
            b in proptest::collection::vec(any::<u64>(), 1..5),
            m in any::<u64>(),
            p in 1u32..300,
        ) {
            let x = Fixed::from_limbs(a, p);
            let y = Fixed::from_limbs(b, p);
            let md = modulus(p);

            let mut s = x.clone();
            s.add_assign(&y);
            prop_assert_eq!(big(&s), (big(&x) + big(&y)) % &md);

            let mut t = x.clone();
            t.mul_small_assign(m);
            prop_assert_eq!(big(&t), (big(&x) * BigUint::from(m)) % &md);

            let mut u = x.clone();
            u.mul_assign(&y);
            prop_assert_eq!(big(&u), (big(&x) * big(&y)) % &md);

            let n = x.neg();
            prop_assert_eq!(big(&n), (&md - big(&x)) % &md);

            prop_assert_eq!(x.cmp(&y), big(&x).cmp(&big(&y)));
        }
    }
}
