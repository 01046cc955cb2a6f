//! Direct evaluation of Weyl sums `g_k(alpha; N) = sum_{n<=N} e(alpha_k n^k + ... + alpha_1 n)`.
//!
//! Phases are exact residues modulo 1 (see [`crate::arith`]); only the final
//! `cos`/`sin` is rounded, in double-double precision, and terms are
//! accumulated in double-double. The range `[1, N]` is split into fixed-size
//! blocks that may run on any number of workers; block sums are combined in
//! block order, so the result does not depend on the thread count.

pub mod dd;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{Angle, Fixed, FracDistance};
use crate::config::Limits;
use crate::error::{Error, Result};
pub use dd::DoubleDouble;

/// Terms per block of the parallel sum; fixed so results are reproducible.
pub const BLOCK: u64 = 4096;

/// Per-term rounding of the trigonometric kernel (conservative).
const TERM_ERROR: f64 = 3.155443620884047e-30; // 2^-98
/// Relative rounding of one double-double addition (conservative).
const ADD_ERROR: f64 = 9.860761315262648e-32; // 2^-103

/// Coefficients `(alpha_1, ..., alpha_k)` of a polynomial phase, all at the
/// same precision. `coeffs[j - 1]` holds `alpha_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Angle>", into = "Vec<Angle>")]
pub struct CoefficientVector {
    coeffs: Vec<Angle>,
}

impl TryFrom<Vec<Angle>> for CoefficientVector {
    type Error = Error;

    fn try_from(v: Vec<Angle>) -> Result<Self> {
        CoefficientVector::new(v)
    }
}

impl From<CoefficientVector> for Vec<Angle> {
    fn from(c: CoefficientVector) -> Self {
        c.coeffs
    }
}

impl CoefficientVector {
    pub fn new(coeffs: Vec<Angle>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::Domain("coefficient vector must have degree k >= 1".into()));
        };
        let p = first.precision();
        if coeffs.iter().any(|a| a.precision() != p) {
            return Err(Error::Domain("all coefficients must share one precision".into()));
        }
        Ok(CoefficientVector { coeffs })
    }

    pub fn zeros(k: u32, prec: u32) -> Result<Self> {
        let z = Angle::zero(prec)?;
        Self::new(vec![z; k.max(1) as usize])
    }

    /// `(0, ..., 0, beta)` of degree `k`.
    pub fn monomial(beta: &Angle, k: u32) -> Result<Self> {
        let mut c = Self::zeros(k, beta.precision())?;
        c.coeffs[k as usize - 1] = beta.clone();
        Ok(c)
    }

    /// `(alpha_1, 0, ..., 0, alpha_k)` of degree `k`.
    pub fn binomial(alpha_k: &Angle, alpha_1: &Angle, k: u32) -> Result<Self> {
        if alpha_k.precision() != alpha_1.precision() {
            return Err(Error::Domain("coefficients must share one precision".into()));
        }
        let mut c = Self::monomial(alpha_k, k)?;
        if k == 1 {
            let sum = alpha_k.add(alpha_1)?;
            c.coeffs[0] = sum;
        } else {
            c.coeffs[0] = alpha_1.clone();
        }
        Ok(c)
    }

    /// Parses each entry with [`Angle::parse`]; entry `j - 1` is `alpha_j`.
    pub fn parse<S: AsRef<str>>(items: &[S], prec: u32) -> Result<Self> {
        let coeffs = items
            .iter()
            .map(|s| Angle::parse(s.as_ref(), prec))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs)
    }

    pub fn k(&self) -> u32 {
        self.coeffs.len() as u32
    }

    pub fn precision(&self) -> u32 {
        self.coeffs[0].precision()
    }

    pub fn coeffs(&self) -> &[Angle] {
        &self.coeffs
    }

    /// `alpha_j`, 1-based.
    pub fn coeff(&self, j: u32) -> &Angle {
        &self.coeffs[j as usize - 1]
    }

    /// Whether `alpha_2 = ... = alpha_{k-1} = 0`.
    pub fn is_binomial(&self) -> bool {
        let k = self.coeffs.len();
        k <= 2 || self.coeffs[1..k - 1].iter().all(Angle::is_zero)
    }

    /// `(m alpha_1, ..., m alpha_k)` modulo 1.
    pub fn scaled(&self, m: u64) -> Self {
        CoefficientVector {
            coeffs: self.coeffs.iter().map(|a| a.scale(m)).collect(),
        }
    }

    /// `(-alpha_1, ..., -alpha_k)` modulo 1.
    pub fn negated(&self) -> Self {
        CoefficientVector {
            coeffs: self.coeffs.iter().map(Angle::neg).collect(),
        }
    }

    /// Same coefficients re-expressed at a higher precision.
    pub fn with_precision(&self, prec: u32) -> Result<Self> {
        Self::new(
            self.coeffs
                .iter()
                .map(|a| a.with_precision(prec))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Writes `sum_j alpha_j n^j mod 1` into `acc` by Horner's rule.
    pub fn phase_into(&self, n: u64, acc: &mut Fixed) {
        let k = self.coeffs.len();
        acc.copy_from(self.coeffs[k - 1].fixed());
        for a in self.coeffs[..k - 1].iter().rev() {
            acc.mul_small_assign(n);
            acc.add_assign(a.fixed());
        }
        acc.mul_small_assign(n);
    }

    /// The phase `sum_j alpha_j n^j mod 1`.
    pub fn phase(&self, n: u64) -> Angle {
        let mut acc = Fixed::zero(self.precision());
        self.phase_into(n, &mut acc);
        Angle::from_fixed(acc)
    }

    /// `|| sum_j alpha_j n^j ||`.
    pub fn objective(&self, n: u64) -> FracDistance {
        self.phase(n).frac_distance()
    }

    /// The phase at an arbitrary-size `n`, via full integer powers.
    pub fn phase_big(&self, n: &BigUint) -> Angle {
        let mut acc = Angle::zero(self.precision()).expect("positive precision");
        for (j, a) in self.coeffs.iter().enumerate() {
            acc = acc.add(&a.mul_pow_mod1_big(n, j as u32 + 1)).expect("shared precision");
        }
        acc
    }
}

/// Value of a Weyl sum with a bound on its accumulated rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylSumValue {
    pub re: DoubleDouble,
    pub im: DoubleDouble,
    pub n: u64,
    /// Absolute bound on the rounding in `re` and in `im`.
    pub error_bound: f64,
}

impl WeylSumValue {
    pub fn modulus(&self) -> f64 {
        self.modulus_dd().to_f64()
    }

    pub fn modulus_dd(&self) -> DoubleDouble {
        (self.re.sqr() + self.im.sqr()).sqrt()
    }

    /// A certified lower bound for the modulus.
    pub fn modulus_lower(&self) -> f64 {
        let m = self.modulus();
        // sqrt(2) * per-component bound, plus the final rounding of m
        (m - std::f64::consts::SQRT_2 * self.error_bound - m * f64::EPSILON).max(0.0)
    }
}

#[derive(Serialize, Deserialize)]
struct WeylSumRepr {
    n: u64,
    re: f64,
    re_lo: f64,
    im: f64,
    im_lo: f64,
    modulus: f64,
    error_bound: f64,
}

impl Serialize for WeylSumValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WeylSumRepr {
            n: self.n,
            re: self.re.hi,
            re_lo: self.re.lo,
            im: self.im.hi,
            im_lo: self.im.lo,
            modulus: self.modulus(),
            error_bound: self.error_bound,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeylSumValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = WeylSumRepr::deserialize(d)?;
        Ok(WeylSumValue {
            re: DoubleDouble::new(r.re, r.re_lo),
            im: DoubleDouble::new(r.im, r.im_lo),
            n: r.n,
            error_bound: r.error_bound,
        })
    }
}

/// Rounding bound for an `n`-term sum.
pub fn error_bound_for(n: u64) -> f64 {
    let n = n as f64;
    n * TERM_ERROR + n * n * ADD_ERROR
}

/// `g_k(alpha; N)`.
pub fn weyl_sum(c: &CoefficientVector, n: u64, limits: &Limits) -> Result<WeylSumValue> {
    if n == 0 {
        return Err(Error::out_of_range("weyl_sum", "N >= 1", n));
    }
    if n > limits.weyl_max_n {
        return Err(Error::budget("weyl_sum", n, limits.weyl_max_n));
    }
    let blocks = n.div_ceil(BLOCK);
    let partials: Vec<(DoubleDouble, DoubleDouble)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK + 1;
            let end = ((b + 1) * BLOCK).min(n);
            block_sum(c, start, end)
        })
        .collect();
    let (re, im) = partials
        .into_iter()
        .fold((DoubleDouble::ZERO, DoubleDouble::ZERO), |(r, i), (pr, pi)| {
            (r + pr, i + pi)
        });
    Ok(WeylSumValue {
        re,
        im,
        n,
        error_bound: error_bound_for(n),
    })
}

fn block_sum(c: &CoefficientVector, start: u64, end: u64) -> (DoubleDouble, DoubleDouble) {
    let mut acc = Fixed::zero(c.precision());
    let mut re = DoubleDouble::ZERO;
    let mut im = DoubleDouble::ZERO;
    for m in start..=end {
        c.phase_into(m, &mut acc);
        let (cs, sn) = dd::sincos_turns(acc.top_u128());
        re = re + cs;
        im = im + sn;
    }
    (re, im)
}

/// `S(m) = sum_{n<=N} e(m beta n^k)`.
pub fn monomial_sum(beta: &Angle, k: u32, m: u64, n: u64, limits: &Limits) -> Result<WeylSumValue> {
    if m == 0 {
        return Err(Error::out_of_range("monomial_sum", "m >= 1", m));
    }
    if k == 0 {
        return Err(Error::out_of_range("monomial_sum", "k >= 1", k));
    }
    let c = CoefficientVector::monomial(&beta.scale(m), k)?;
    weyl_sum(&c, n, limits)
}

/// `|sin(pi alpha N) / sin(pi alpha)|`, the modulus of a linear sum.
pub fn k1_closed_form(alpha: &Angle, n: u64) -> Result<f64> {
    if alpha.is_zero() {
        return Err(Error::Domain("alpha = 0: the linear sum is trivially N".into()));
    }
    let p = alpha.precision();
    // sin(pi x) = sin(2 pi (x / 2)); x / 2 is the same numerator one bit finer.
    let half_turn = |x: &Angle| Fixed::from_biguint(&x.numerator(), p + 1).top_u128();
    let (_, num) = dd::sincos_turns(half_turn(&alpha.scale(n)));
    let (_, den) = dd::sincos_turns(half_turn(alpha));
    Ok((num.abs().to_f64() / den.abs().to_f64()).abs())
}
