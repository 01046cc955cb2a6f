//! From a large Weyl sum to a simultaneous rational approximation.
//!
//! If `|g_k(alpha; N)| >= A` with `A` above the large-sum threshold, there is
//! `1 <= q <= N^eps (N/A)^k` with `|q alpha_j - a_j| <= N^{-j+eps} (N/A)^k`
//! for every `j`. [`recover`] finds the smallest such `q` by scanning, which
//! is cheap exactly when `A` is large. All inequalities are decided in exact
//! arithmetic; nothing is rounded.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{abs_residual, Angle, Fixed, FracDistance, PowerBound};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::weyl::CoefficientVector;

/// Denominators per block of the parallel scan.
const SCAN_BLOCK: u64 = 4096;

/// `q <= Q` with `||q alpha||` minimal (smallest such `q`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirichletResult {
    pub q: u64,
    /// Nearest integer to `q alpha`.
    #[serde(with = "crate::serde_big::int")]
    pub p: BigInt,
    pub error: FracDistance,
}

impl DirichletResult {
    /// Whether `error <= 1/(Q+1)`, exactly.
    pub fn meets_dirichlet(&self, q_max: u64) -> bool {
        self.error.to_rational() * BigRational::from_integer(BigInt::from(q_max) + 1) <= BigRational::one()
    }
}

fn dirichlet_at(alpha: &Angle, q: u64) -> DirichletResult {
    let x = alpha.scale(q);
    DirichletResult {
        q,
        p: crate::arith::nearest_integer_multiple(alpha, q),
        error: x.frac_distance(),
    }
}

/// Best approximation with denominator at most `q_max`.
///
/// Uses continued-fraction convergents of the stored dyadic value; small
/// `q_max` is scanned exhaustively.
pub fn dirichlet_1d(alpha: &Angle, q_max: u64) -> Result<DirichletResult> {
    if q_max == 0 {
        return Err(Error::out_of_range("dirichlet_1d", "Q >= 1", q_max));
    }
    if q_max <= 64 {
        let best = (1..=q_max)
            .map(|q| dirichlet_at(alpha, q))
            .min_by(|a, b| a.error.cmp(&b.error).then(a.q.cmp(&b.q)))
            .expect("nonempty range");
        return Ok(best);
    }
    // convergents of numerator / 2^P
    let mut num = BigInt::from(alpha.numerator());
    let mut den = BigInt::one() << alpha.precision();
    let (mut q_prev, mut q_cur) = (BigInt::zero(), BigInt::one());
    let limit = BigInt::from(q_max);
    let mut last = 1u64;
    while !num.is_zero() {
        let a = &den / &num;
        let r = &den % &num;
        den = num;
        num = r;
        let q_next = &a * &q_cur + &q_prev;
        if q_next > limit {
            break;
        }
        q_prev = q_cur;
        q_cur = q_next;
        last = q_cur.to_u64().expect("bounded by q_max");
    }
    Ok(dirichlet_at(alpha, last))
}

/// Which side of the large-sum threshold `A` falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `A` exceeds the threshold: an approximation is guaranteed (for `N`
    /// large enough).
    HypothesisHolds,
    /// `A` is at or below the threshold: the scan runs without a guarantee.
    BelowThreshold,
    /// `k < 3`: no threshold is defined.
    NotApplicable,
}

/// Large-sum threshold `N^{1 - 1/J + eps}` with `J = 2k(k-1)`, or `J = k(k-1)`
/// when only the leading and linear coefficients may be nonzero.
pub fn threshold(k: u32, n: u64, eps: &BigRational, monomial: bool) -> Result<PowerBound> {
    if k < 3 {
        return Err(Error::out_of_range("threshold", "k >= 3", k));
    }
    let kk = k as i64 * (k as i64 - 1);
    let j = if monomial { kk } else { 2 * kk };
    let exp = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(j)) + eps;
    PowerBound::new(BigRational::one(), n, exp)
}

/// `N^eps (N/A)^k`, the bound on `q`.
pub fn scan_bound(k: u32, n: u64, a: &BigRational, eps: &BigRational) -> Result<PowerBound> {
    let amp = amplification(n, a)?;
    PowerBound::new(pow_rational(&amp, k), n, eps.clone())
}

/// `N^{-j+eps} (N/A)^k`, the bound on `|q alpha_j - a_j|`.
pub fn residual_bound(j: u32, k: u32, n: u64, a: &BigRational, eps: &BigRational) -> Result<PowerBound> {
    let amp = amplification(n, a)?;
    let exp = eps - BigRational::from_integer(j.into());
    PowerBound::new(pow_rational(&amp, k), n, exp)
}

fn amplification(n: u64, a: &BigRational) -> Result<BigRational> {
    if !a.is_positive() {
        return Err(Error::out_of_range("recover", "A > 0", a));
    }
    Ok(BigRational::from_integer(n.into()) / a)
}

fn pow_rational(x: &BigRational, k: u32) -> BigRational {
    BigRational::new(x.numer().pow(k), x.denom().pow(k))
}

/// `(q; a_1, ..., a_k)` with exact residuals `|q alpha_j - a_j|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalApprox {
    pub q: u64,
    pub a: Vec<i64>,
    #[serde(with = "crate::serde_big::rationals")]
    pub residuals: Vec<BigRational>,
    /// Permitted residuals `N^{-j+eps} (N/A)^k`, rounded for display.
    pub thresholds: Vec<f64>,
}

/// Outcome of [`recover`]; `approx` is `None` when the scan found nothing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub regime: Regime,
    /// Large-sum threshold for this `k, N, eps`, when defined.
    pub threshold: Option<f64>,
    pub scan_bound: u64,
    pub approx: Option<RationalApprox>,
}

impl RecoveryReport {
    pub fn found(&self) -> bool {
        self.approx.is_some()
    }
}

fn check_eps(eps: &BigRational) -> Result<()> {
    if !eps.is_positive() {
        return Err(Error::out_of_range("recover", "eps > 0", eps));
    }
    Ok(())
}

/// Classifies `A` against the threshold.
pub fn regime(c: &CoefficientVector, n: u64, a: &BigRational, eps: &BigRational) -> Result<Regime> {
    if c.k() < 3 {
        return Ok(Regime::NotApplicable);
    }
    let t = threshold(c.k(), n, eps, c.is_binomial())?;
    Ok(if t.admits(a) {
        Regime::BelowThreshold
    } else {
        Regime::HypothesisHolds
    })
}

/// Smallest `q <= N^eps (N/A)^k` with `||q alpha_j|| <= N^{-j+eps} (N/A)^k`
/// for all `j`.
pub fn recover(
    c: &CoefficientVector,
    n: u64,
    a: &BigRational,
    eps: &BigRational,
    limits: &Limits,
) -> Result<RecoveryReport> {
    check_eps(eps)?;
    if n == 0 {
        return Err(Error::out_of_range("recover", "N >= 1", n));
    }
    if *a > BigRational::from_integer(n.into()) {
        return Err(Error::out_of_range("recover", format!("A <= N = {n}"), a));
    }
    let k = c.k();
    let bound = scan_bound(k, n, a, eps)?;
    let big = bound.floor();
    if big > BigUint::from(limits.recover_budget) {
        return Err(Error::budget("recover", &big, limits.recover_budget));
    }
    let q_max = big.to_u64().expect("within budget");
    let bounds: Vec<PowerBound> = (1..=k)
        .map(|j| residual_bound(j, k, n, a, eps))
        .collect::<Result<_>>()?;
    let regime = regime(c, n, a, eps)?;
    let thr = if k >= 3 {
        Some(threshold(k, n, eps, c.is_binomial())?.to_f64())
    } else {
        None
    };

    let blocks = q_max.div_ceil(SCAN_BLOCK);
    let hit = (0..blocks)
        .into_par_iter()
        .find_map_first(|b| scan_block(c, &bounds, b * SCAN_BLOCK + 1, ((b + 1) * SCAN_BLOCK).min(q_max)));

    let approx = hit.map(|q| {
        let a_vec: Vec<i64> = c
            .coeffs()
            .iter()
            .map(|x| crate::arith::nearest_integer_multiple(x, q).to_i64().expect("a_j <= q"))
            .collect();
        let residuals = c
            .coeffs()
            .iter()
            .zip(&a_vec)
            .map(|(x, &aj)| abs_residual(x, q, aj))
            .collect();
        RationalApprox {
            q,
            a: a_vec,
            residuals,
            thresholds: bounds.iter().map(PowerBound::to_f64).collect(),
        }
    });
    Ok(RecoveryReport {
        regime,
        threshold: thr,
        scan_bound: q_max,
        approx,
    })
}

fn scan_block(c: &CoefficientVector, bounds: &[PowerBound], start: u64, end: u64) -> Option<u64> {
    let prec = c.precision();
    let mut accs: Vec<Fixed> = c.coeffs().iter().map(|x| x.scale(start).fixed().clone()).collect();
    let mut dist = Fixed::zero(prec);
    for q in start..=end {
        // the highest degree has the tightest bound; test it first
        let ok = (0..accs.len()).rev().all(|j| {
            accs[j].distance_into(&mut dist);
            bounds[j].admits_fixed(&dist)
        });
        if ok {
            return Some(q);
        }
        for (acc, x) in accs.iter_mut().zip(c.coeffs()) {
            acc.add_assign(x.fixed());
        }
    }
    None
}

/// Per-inequality outcome of [`verify_approx`]. Margins are
/// `log2(bound / value)`; `None` means the value is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// `1 <= q <= N^eps (N/A)^k`.
    pub q_bound: bool,
    pub q_margin_log2: f64,
    /// `|q alpha_j - a_j| <= N^{-j+eps} (N/A)^k`, for `j = 1..=k`.
    pub residuals: Vec<bool>,
    pub residual_margins_log2: Vec<Option<f64>>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.q_bound && self.residuals.iter().all(|&b| b)
    }
}

fn margin(bound: &PowerBound, value: &BigRational) -> Option<f64> {
    if value.is_zero() {
        None
    } else {
        Some((bound.ln() - crate::arith::bound::ln_rational(value)) / std::f64::consts::LN_2)
    }
}

/// Re-checks both inequalities for `(q; a)` in exact arithmetic.
pub fn verify_approx(
    r: &RationalApprox,
    c: &CoefficientVector,
    n: u64,
    a: &BigRational,
    eps: &BigRational,
) -> Result<Verification> {
    let k = c.k();
    if r.a.len() != k as usize {
        return Err(Error::Domain(format!("expected {k} numerators, got {}", r.a.len())));
    }
    let qb = scan_bound(k, n, a, eps)?;
    let q_big = BigUint::from(r.q);
    let mut residuals = Vec::with_capacity(k as usize);
    let mut margins = Vec::with_capacity(k as usize);
    for (j, (x, &aj)) in c.coeffs().iter().zip(&r.a).enumerate() {
        let bound = residual_bound(j as u32 + 1, k, n, a, eps)?;
        let res = abs_residual(x, r.q, aj);
        residuals.push(bound.admits_exact(&res));
        margins.push(margin(&bound, &res));
    }
    Ok(Verification {
        q_bound: r.q >= 1 && qb.admits_exact(&BigRational::from_integer(q_big.into())),
        q_margin_log2: margin(&qb, &BigRational::from_integer(r.q.into())).unwrap_or(f64::INFINITY),
        residuals,
        residual_margins_log2: margins,
    })
}

/// Outcome of [`verify_factored`] for `q = t r`, `a_j = t v_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactoredVerification {
    /// `1 <= t <= 2k^2`.
    pub t_small: bool,
    /// `t r <= (N/H)^k N^eps`.
    pub q_bound: bool,
    /// `t |alpha_j r - v_j| <= (N/H)^k N^{-j+eps}`.
    pub residuals: Vec<bool>,
    /// `||t r alpha_1|| <= (N/H) N^{-1+eps}`.
    pub linear: bool,
}

impl FactoredVerification {
    pub fn passed(&self) -> bool {
        self.t_small && self.q_bound && self.linear && self.residuals.iter().all(|&b| b)
    }
}

/// Checks the factored form `q = t r`, `a_j = t v_j` of an approximation.
pub fn verify_factored(
    t: u64,
    r: u64,
    v: &[i64],
    c: &CoefficientVector,
    n: u64,
    h: &BigRational,
    eps: &BigRational,
) -> Result<FactoredVerification> {
    let k = c.k();
    if v.len() != k as usize {
        return Err(Error::Domain(format!("expected {k} numerators, got {}", v.len())));
    }
    let q = t.checked_mul(r).ok_or_else(|| Error::Domain("t r overflows".into()))?;
    let qb = scan_bound(k, n, h, eps)?;
    let mut residuals = Vec::new();
    for (j, (x, &vj)) in c.coeffs().iter().zip(v).enumerate() {
        let tv = (t as i64)
            .checked_mul(vj)
            .ok_or_else(|| Error::Domain("t v_j overflows".into()))?;
        let bound = residual_bound(j as u32 + 1, k, n, h, eps)?;
        residuals.push(bound.admits_exact(&abs_residual(x, q, tv)));
    }
    let amp = amplification(n, h)?;
    let linear_bound = PowerBound::new(amp, n, eps - BigRational::one())?;
    let linear = linear_bound.admits_exact(&c.coeff(1).scale(q).frac_distance().to_rational());
    Ok(FactoredVerification {
        t_small: t >= 1 && t <= 2 * (k as u64) * (k as u64),
        q_bound: r >= 1 && qb.admits_exact(&BigRational::from_integer(q.into())),
        residuals,
        linear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{parse_rational, rational_from_f64};
    use crate::weyl::weyl_sum;
    use proptest::prelude::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn dirichlet_examples() {
        let third = Angle::parse("1/3", 200).unwrap();
        let d = dirichlet_1d(&third, 5).unwrap();
        assert_eq!(d.q, 3);
        assert!(d.error.to_f64() < 1e-59);

        let pi = Angle::parse("pi", 128).unwrap();
        let d = dirichlet_1d(&pi, 10).unwrap();
        assert_eq!((d.q, d.p.clone()), (7, BigInt::from(1)));
        assert!((d.error.to_f64() - 0.008851424871).abs() < 1e-11);
        let d = dirichlet_1d(&pi, 200).unwrap();
        assert_eq!(d.q, 113);
        assert!((d.error.to_f64() - 3.0144e-5).abs() < 1e-8);
        assert!(d.meets_dirichlet(200));

        let zero = Angle::zero(64).unwrap();
        assert_eq!(dirichlet_1d(&zero, 1000).unwrap().q, 1);
        assert!(dirichlet_1d(&pi, 0).is_err());
    }

    #[test]
    fn threshold_values() {
        let zero = BigRational::zero();
        let t = threshold(8, 1_000_000, &zero, false).unwrap();
        assert_eq!(*t.exponent(), q("111/112"));
        let t = threshold(6, 1_000_000, &zero, true).unwrap();
        assert_eq!(*t.exponent(), q("29/30"));
        let t = threshold(3, 10, &zero, false).unwrap();
        assert!((t.to_f64() - 10f64.powf(11.0 / 12.0)).abs() < 1e-9);
        assert!((t.to_f64() - 8.25).abs() < 0.01);
        assert!(threshold(2, 10, &zero, false).is_err());
    }

    fn seventh_cube(prec: u32) -> CoefficientVector {
        CoefficientVector::parse(&["0", "0", "1/7"], prec).unwrap()
    }

    #[test]
    fn recovers_seventh_cube() {
        let c = seventh_cube(128);
        let g = weyl_sum(&c, 343, &lim()).unwrap();
        // |sum_{n<=7} e(n^3/7)| * 49
        let complete = 1.0 + 2.0 * (2.0 * std::f64::consts::PI / 7.0).cos() * 3.0;
        assert!((g.modulus() - 49.0 * complete.abs()).abs() < 1e-9);
        let a = rational_from_f64(g.modulus_lower()).unwrap();
        let eps = q("0.15");
        let rep = recover(&c, 343, &a, &eps, &lim()).unwrap();
        let r = rep.approx.clone().unwrap();
        assert_eq!(r.q, 7);
        assert_eq!(r.a, vec![0, 0, 1]);
        assert!(verify_approx(&r, &c, 343, &a, &eps).unwrap().passed());

        // the bound (N/A)^3 N^eps falls below 7 for smaller eps
        let rep = recover(&c, 343, &a, &q("0.1"), &lim()).unwrap();
        assert!(rep.approx.is_none());
        assert!(rep.scan_bound < 7);
    }

    #[test]
    fn zero_phases_give_q_one() {
        let c = CoefficientVector::zeros(4, 64).unwrap();
        let a = BigRational::from_integer(1000.into());
        let rep = recover(&c, 1000, &a, &q("0.05"), &lim()).unwrap();
        assert_eq!(rep.regime, Regime::HypothesisHolds);
        let r = rep.approx.unwrap();
        assert_eq!((r.q, r.a), (1, vec![0, 0, 0, 0]));
    }

    #[test]
    fn generic_vector_with_fictitious_large_sum() {
        let c = CoefficientVector::parse(&["pi", "e", "phi", "sqrt2"], 256).unwrap();
        let a = rational_from_f64(1e4f64.powf(0.99)).unwrap();
        let rep = recover(&c, 10_000, &a, &q("0.05"), &lim()).unwrap();
        assert!(rep.approx.is_none());
    }

    #[test]
    fn refusals() {
        let c = CoefficientVector::parse(&["pi", "e", "phi"], 128).unwrap();
        let small = Limits::with_budget(10);
        let a = BigRational::from_integer(10.into());
        assert!(matches!(
            recover(&c, 10_000, &a, &q("0.05"), &small),
            Err(Error::Budget { .. })
        ));
        assert!(recover(&c, 10, &q("11"), &q("0.05"), &lim()).is_err());
        assert!(recover(&c, 10, &q("5"), &q("0"), &lim()).is_err());
    }

    #[test]
    fn verification_detects_violations() {
        let c = seventh_cube(128);
        let a = q("232");
        let eps = q("0.15");
        let good = recover(&c, 343, &a, &eps, &lim()).unwrap().approx.unwrap();

        let mut far = good.clone();
        far.q = 2 * 7 * 1000;
        far.a = vec![0, 0, 2000];
        let v = verify_approx(&far, &c, 343, &a, &eps).unwrap();
        assert!(!v.q_bound);

        let mut off = good.clone();
        off.a[2] += 1;
        let v = verify_approx(&off, &c, 343, &a, &eps).unwrap();
        assert!(v.q_bound && !v.residuals[2] && v.residuals[0]);
        assert!(!v.passed());
    }

    #[test]
    fn factored_form() {
        let c = seventh_cube(128);
        let h = q("232");
        let eps = q("0.15");
        assert!(verify_factored(1, 7, &[0, 0, 1], &c, 343, &h, &eps).unwrap().passed());
        let f = verify_factored(1000, 7, &[0, 0, 1], &c, 343, &h, &eps).unwrap();
        assert!(!f.t_small && !f.q_bound);
        let f = verify_factored(1, 7, &[0, 0, 2], &c, 343, &h, &eps).unwrap();
        assert!(!f.residuals[2] && f.linear);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn dirichlet_matches_exhaustive(num in any::<u64>(), q_max in 1u64..400) {
            let alpha = Angle::new(BigUint::from(num), 64).unwrap();
            let d = dirichlet_1d(&alpha, q_max).unwrap();
            let brute = (1..=q_max)
                .map(|q| (alpha.scale(q).frac_distance(), q))
                .min()
                .unwrap();
            prop_assert_eq!((d.error.clone(), d.q), brute);
            prop_assert!(d.meets_dirichlet(q_max));
        }

        #[test]
        fn dirichlet_guarantee_large_q(num in any::<u64>(), q_max in 1u64..1_000_000_000) {
            let alpha = Angle::new(BigUint::from(num), 96).unwrap();
            prop_assert!(dirichlet_1d(&alpha, q_max).unwrap().meets_dirichlet(q_max));
        }

        #[test]
        fn recovery_monotone_in_a(q0 in 2u64..15, nums in proptest::collection::vec(0i64..1000, 3), n in 200u64..2000) {
            let coeffs = nums.iter().map(|&a| crate::arith::angle_from_rational(a, q0, 128).unwrap()).collect();
            let c = CoefficientVector::new(coeffs).unwrap();
            let eps = q("0.2");
            let g = weyl_sum(&c, n, &lim()).unwrap();
            prop_assume!(g.modulus_lower() > n as f64 / 8.0);
            let a = rational_from_f64(g.modulus_lower()).unwrap();
            let rep = recover(&c, n, &a, &eps, &lim()).unwrap();
            if let Some(r) = rep.approx {
                prop_assert!(verify_approx(&r, &c, n, &a, &eps).unwrap().passed());
                let smaller = &a * q("3/4");
                prop_assert!(verify_approx(&r, &c, n, &smaller, &eps).unwrap().passed());
            }
        }
    }
}
