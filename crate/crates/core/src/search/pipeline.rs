//! Constructive pipelines producing small values of `||P(n)||`.
//!
//! * [`construct_qm`]: find a multiplier `m <= M` with a large Weyl sum
//!   `g_k(m alpha; N)`, recover a denominator `q` for `m alpha`, and take
//!   `n = q m`.
//! * [`two_step_minimize`]: for `alpha_k n^k + alpha_1 n`, first pick `l` with
//!   `||alpha_1 l||` small, then minimize `||(alpha_k l^k) m^k||` over `m`, and
//!   take `n = l m`.
//!
//! Both are asymptotic arguments. At desk scale they can fail, and failures
//! are reported in the trace rather than raised.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::{min_poly, Argmin, MinResult};
use crate::arith::{rational_from_f64, Angle, Fixed, FracDistance, PowerBound};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::recovery::{recover, verify_approx, RationalApprox, Regime};
use crate::weyl::{weyl_sum, CoefficientVector};

fn rational_string<S: serde::Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}

/// Everything [`construct_qm`] computed on the way.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QmTrace {
    pub k: u32,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(serialize_with = "rational_string")]
    pub eps: BigRational,
    /// `k(k-1)` when only `alpha_k, alpha_1` are nonzero, else `2k(k-1)`.
    pub j: u64,
    /// `floor(N^{1/J - eps})`.
    pub m_bound: u64,
    /// `|g_k(m alpha; N)|` for `m = 1..=M`.
    pub moduli: Vec<f64>,
    /// Multiplier with the largest sum (smallest on ties).
    pub m: u64,
    /// The averaging bound `N / 6M` that some `m` should exceed.
    pub a_average: f64,
    /// Whether the chosen sum exceeds `N / 6M`.
    pub exceeds_average: bool,
    /// Certified lower bound on the chosen sum, used as `A` in recovery.
    pub a_used: f64,
    pub regime: Option<Regime>,
    pub scan_bound: Option<u64>,
    pub approx: Option<RationalApprox>,
    /// `q m`, when recovery succeeded.
    pub n_witness: Option<u64>,
    /// Why no witness was produced.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QmOutcome {
    pub trace: QmTrace,
    /// The witness `n = q m` with its objective value, if any.
    pub result: Option<MinResult>,
}

/// `floor(N^{1/J - eps})`.
pub fn qm_multiplier_bound(n: u64, j: u64, eps: &BigRational) -> Result<u64> {
    let e = BigRational::new(BigInt::one(), BigInt::from(j)) - eps;
    Ok(PowerBound::power(n, e)?.floor_u64())
}

/// The `n = q m` construction. Requires `k >= 8`, or `k >= 6` when only
/// `alpha_k` and `alpha_1` are nonzero, and `floor(N^{1/J - eps}) >= 1`.
pub fn construct_qm(c: &CoefficientVector, n: u64, eps: &BigRational, limits: &Limits) -> Result<QmOutcome> {
    let k = c.k();
    let binomial = c.is_binomial();
    let kk = k as u64 * (k as u64).saturating_sub(1);
    let j = if binomial {
        if k < 6 {
            return Err(Error::out_of_range("construct_qm", "k >= 6 (binomial vector)", k));
        }
        kk
    } else {
        if k < 8 {
            return Err(Error::out_of_range("construct_qm", "k >= 8 (full vector)", k));
        }
        2 * kk
    };
    if !eps.is_positive() {
        return Err(Error::out_of_range("construct_qm", "eps > 0", eps));
    }
    let m_bound = qm_multiplier_bound(n, j, eps)?;
    if m_bound < 1 {
        return Err(Error::Precondition(format!(
            "M = floor(N^(1/{j} - {eps})) = 0 at N = {n}; increase N or decrease eps"
        )));
    }
    let work = (m_bound as u128) * (n as u128);
    if work > limits.poly_budget as u128 {
        return Err(Error::budget("construct_qm", work, limits.poly_budget));
    }

    let sums = (1..=m_bound)
        .map(|m| weyl_sum(&c.scaled(m), n, limits))
        .collect::<Result<Vec<_>>>()?;
    let moduli: Vec<f64> = sums.iter().map(|g| g.modulus()).collect();
    let (best_idx, _) =
        moduli.iter().enumerate().fold(
            (0usize, f64::NEG_INFINITY),
            |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
        );
    let m = best_idx as u64 + 1;
    let a_average = n as f64 / (6.0 * m_bound as f64);
    let a_used = sums[best_idx].modulus_lower().min(n as f64);

    let mut trace = QmTrace {
        k,
        n,
        eps: eps.clone(),
        j,
        m_bound,
        moduli: moduli.clone(),
        m,
        a_average,
        exceeds_average: moduli[best_idx] > a_average,
        a_used,
        regime: None,
        scan_bound: None,
        approx: None,
        n_witness: None,
        failure: None,
    };
    if a_used <= 0.0 {
        trace.failure = Some("largest Weyl sum is indistinguishable from zero".into());
        return Ok(QmOutcome { trace, result: None });
    }
    let a = rational_from_f64(a_used)?;
    let scaled = c.scaled(m);
    let report = match recover(&scaled, n, &a, eps, limits) {
        Ok(r) => r,
        Err(e @ Error::Budget { .. }) => {
            trace.failure = Some(format!("recovery scan refused: {e}"));
            return Ok(QmOutcome { trace, result: None });
        }
        Err(e) => return Err(e),
    };
    trace.regime = Some(report.regime);
    trace.scan_bound = Some(report.scan_bound);
    let Some(approx) = report.approx else {
        trace.failure = Some(format!(
            "no q <= {} approximates m alpha within the permitted residuals",
            report.scan_bound
        ));
        return Ok(QmOutcome { trace, result: None });
    };
    let witness = approx.q.checked_mul(m).filter(|&w| w <= n);
    trace.approx = Some(approx);
    let Some(w) = witness else {
        trace.failure = Some("q m exceeds N".into());
        return Ok(QmOutcome { trace, result: None });
    };
    trace.n_witness = Some(w);
    let result = MinResult {
        argmin: Argmin::Single(w),
        value: c.objective(w),
        n,
        evaluations: 1,
    };
    Ok(QmOutcome {
        trace,
        result: Some(result),
    })
}

/// Re-checks a [`QmOutcome`] exactly: the recovered approximation satisfies
/// both inequalities for `m alpha` with the recorded `A`, the witness is
/// `q m <= N`, and its value is the objective at the witness.
pub fn verify_qm(o: &QmOutcome, c: &CoefficientVector) -> Result<bool> {
    let t = &o.trace;
    let (Some(approx), Some(result)) = (&t.approx, &o.result) else {
        return Ok(o.result.is_none());
    };
    let a = rational_from_f64(t.a_used)?;
    let ok_approx = verify_approx(approx, &c.scaled(t.m), t.n, &a, &t.eps)?.passed();
    let w = approx.q * t.m;
    Ok(ok_approx
        && t.m >= 1
        && t.m <= t.m_bound
        && w <= t.n
        && result.argmin == Argmin::Single(w)
        && super::evaluate_poly(c, w) == result.value)
}

/// Everything [`two_step_minimize`] computed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoStepTrace {
    pub k: u32,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(serialize_with = "rational_string")]
    pub nu: BigRational,
    /// `1 / (2 + nu)`.
    #[serde(serialize_with = "rational_string")]
    pub a: BigRational,
    /// `1 - a`.
    #[serde(serialize_with = "rational_string")]
    pub b: BigRational,
    /// `floor(N^b)`.
    pub ell_bound: u64,
    /// `floor(N^a)`.
    pub m_bound: u64,
    pub ell: u64,
    pub m: u64,
    pub final_n: u64,
    /// `||alpha_1 l||`.
    pub step1_value: FracDistance,
    /// `||alpha_k l^k m^k||`.
    pub step2_value: FracDistance,
    /// `||alpha_k n^k + alpha_1 n||` at `n = l m`.
    pub final_value: FracDistance,
}

/// Exact checks on a [`TwoStepTrace`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoStepCertificate {
    /// `||alpha_1 l|| <= N^{-b}`.
    pub step1: bool,
    /// `1 <= l <= N^b`.
    pub ell_in_range: bool,
    /// `1 <= m <= N^a`.
    pub m_in_range: bool,
    /// `l m <= N`.
    pub n_in_range: bool,
    /// `final <= step2 + m step1`.
    pub triangle: bool,
    /// Recorded values equal fresh evaluations.
    pub values_reproduce: bool,
}

impl TwoStepCertificate {
    pub fn passed(&self) -> bool {
        self.step1 && self.ell_in_range && self.m_in_range && self.n_in_range && self.triangle && self.values_reproduce
    }
}

/// Default `nu = 1 / k(k-1)`.
pub fn default_nu(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(k as u64 * (k as u64 - 1).max(1)))
}

/// The `n = l m` construction for `alpha_k n^k + alpha_1 n`.
pub fn two_step_minimize(
    alpha_k: &Angle,
    alpha_1: &Angle,
    k: u32,
    n: u64,
    nu: &BigRational,
    limits: &Limits,
) -> Result<TwoStepTrace> {
    if k < 6 {
        return Err(Error::out_of_range("two_step_minimize", "k >= 6", k));
    }
    if !nu.is_positive() {
        return Err(Error::out_of_range("two_step_minimize", "nu > 0", nu));
    }
    if n < 2 {
        return Err(Error::out_of_range("two_step_minimize", "N >= 2", n));
    }
    if alpha_k.precision() != alpha_1.precision() {
        return Err(Error::Domain("coefficients must share one precision".into()));
    }
    let two = BigRational::from_integer(2.into());
    let a = (&two + nu).recip();
    let b = BigRational::one() - &a;
    let ell_bound = PowerBound::power(n, b.clone())?.floor_u64();
    let m_bound = PowerBound::power(n, a.clone())?.floor_u64();
    if ell_bound > limits.poly_budget || m_bound > limits.poly_budget {
        return Err(Error::budget(
            "two_step_minimize",
            ell_bound.max(m_bound),
            limits.poly_budget,
        ));
    }

    // step 1: smallest l <= N^b with ||alpha_1 l|| <= N^{-b}
    let target = PowerBound::power(n, -b.clone())?;
    let ell = first_good_multiple(alpha_1, ell_bound, &target)
        .ok_or_else(|| Error::Precondition("no l <= N^b meets ||alpha_1 l|| <= N^-b (precision too low?)".into()))?;
    let step1_value = alpha_1.scale(ell).frac_distance();

    // step 2: minimize ||(alpha_k l^k) m^k|| over m <= N^a
    let beta = alpha_k.mul_pow_mod1(ell, k);
    let inner = min_poly(&CoefficientVector::monomial(&beta, k)?, m_bound, limits)?;
    let Argmin::Single(m) = inner.argmin else {
        unreachable!("min_poly returns a single argument")
    };
    let final_n = ell * m;
    let c = CoefficientVector::binomial(alpha_k, alpha_1, k)?;
    Ok(TwoStepTrace {
        k,
        n,
        nu: nu.clone(),
        a,
        b,
        ell_bound,
        m_bound,
        ell,
        m,
        final_n,
        step1_value,
        step2_value: inner.value,
        final_value: c.objective(final_n),
    })
}

fn first_good_multiple(alpha: &Angle, l_max: u64, target: &PowerBound) -> Option<u64> {
    const CHUNK: u64 = 4096;
    let blocks = l_max.div_ceil(CHUNK);
    (0..blocks).into_par_iter().find_map_first(|blk| {
        let start = blk * CHUNK + 1;
        let end = ((blk + 1) * CHUNK).min(l_max);
        let mut acc = alpha.scale(start).fixed().clone();
        let mut dist = Fixed::zero(alpha.precision());
        for l in start..=end {
            acc.distance_into(&mut dist);
            if target.admits_fixed(&dist) {
                return Some(l);
            }
            acc.add_assign(alpha.fixed());
        }
        None
    })
}

/// Re-derives every claim of a [`TwoStepTrace`] in exact arithmetic.
pub fn certify_two_step(t: &TwoStepTrace, alpha_k: &Angle, alpha_1: &Angle) -> Result<TwoStepCertificate> {
    let n = t.n;
    let step1 = PowerBound::power(n, -t.b.clone())?.admits_exact(&t.step1_value.to_rational());
    let big = |x: u64| BigUint::from(x);
    let ell_in_range = t.ell >= 1 && PowerBound::power(n, t.b.clone())?.admits_int(&big(t.ell));
    let m_in_range = t.m >= 1 && PowerBound::power(n, t.a.clone())?.admits_int(&big(t.m));
    let n_in_range = t.final_n == t.ell * t.m && t.final_n <= n;
    let triangle = t.final_value.to_rational() <= t.step2_value.to_rational() + t.step1_value.times(t.m);
    let c = CoefficientVector::binomial(alpha_k, alpha_1, t.k)?;
    let values_reproduce = alpha_1.scale(t.ell).frac_distance() == t.step1_value
        && alpha_k.mul_pow_mod1(t.ell, t.k).mul_pow_mod1(t.m, t.k).frac_distance() == t.step2_value
        && super::evaluate_poly(&c, t.final_n) == t.final_value;
    Ok(TwoStepCertificate {
        step1,
        ell_in_range,
        m_in_range,
        n_in_range,
        triangle,
        values_reproduce,
    })
}

/// `nu / (2 + nu)` as a float, for reports.
pub fn two_step_rate(nu: &BigRational) -> f64 {
    (nu / (BigRational::from_integer(2.into()) + nu))
        .to_f64()
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_rational;
    use crate::search::min_poly;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn multiplier_bound() {
        // 10^4^(1/30 - 0.01) = 10^0.0933...
        assert_eq!(qm_multiplier_bound(10_000, 30, &q("0.01")).unwrap(), 1);
        assert_eq!(qm_multiplier_bound(10u64.pow(6), 30, &q("0.001")).unwrap(), 1);
        assert_eq!(qm_multiplier_bound(10u64.pow(7), 30, &q("0.001")).unwrap(), 1);
        assert_eq!(qm_multiplier_bound(1 << 30, 30, &q("1/60")).unwrap(), 1);
        assert_eq!(qm_multiplier_bound(1 << 60, 30, &q("1/60")).unwrap(), 2);
    }

    #[test]
    fn qm_on_planted_rationals() {
        let c = CoefficientVector::parse(&["1/2", "0", "0", "0", "0", "1/8"], 128).unwrap();
        let o = construct_qm(&c, 10_000, &q("0.01"), &lim()).unwrap();
        let r = o.result.clone().expect("planted vector recovers");
        assert!(r.value.is_zero());
        assert!(verify_qm(&o, &c).unwrap());
        assert!(min_poly(&c, 10_000, &lim()).unwrap().value <= r.value);

        let full = CoefficientVector::parse(&["7/8", "3/4", "0", "7/8", "3/8", "3/4", "3/4", "1/4"], 128).unwrap();
        let o = construct_qm(&full, 20_000, &q("0.005"), &lim()).unwrap();
        assert!(o.result.unwrap().value.is_zero());
    }

    #[test]
    fn qm_preconditions() {
        let c = CoefficientVector::parse(&["0", "1/3", "0", "0", "0", "1/4"], 128).unwrap();
        assert!(matches!(
            construct_qm(&c, 10_000, &q("0.01"), &lim()),
            Err(Error::OutOfRange { .. })
        ));
        let c = CoefficientVector::parse(&["0", "0", "0", "0", "0", "phi"], 128).unwrap();
        assert!(matches!(
            construct_qm(&c, 10_000, &q("0.05"), &lim()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn qm_generic_input_reports() {
        let c = CoefficientVector::parse(&["0", "0", "0", "0", "0", "phi"], 160).unwrap();
        let o = construct_qm(&c, 100_000, &q("0.01"), &lim()).unwrap();
        assert_eq!(o.trace.m_bound, 1);
        assert!(verify_qm(&o, &c).unwrap());
        if let Some(r) = &o.result {
            assert!(min_poly(&c, 100_000, &lim()).unwrap().value <= r.value);
        } else {
            assert!(o.trace.failure.is_some());
        }
    }

    #[test]
    fn two_step_zero_linear_term() {
        let ak = Angle::parse("pi", 128).unwrap();
        let a1 = Angle::zero(128).unwrap();
        let t = two_step_minimize(&ak, &a1, 6, 10_000, &default_nu(6), &lim()).unwrap();
        assert_eq!(t.ell, 1);
        assert!(t.step1_value.is_zero());
        let direct = min_poly(&CoefficientVector::monomial(&ak, 6).unwrap(), t.m_bound, &lim()).unwrap();
        assert_eq!(direct.value, t.step2_value);
        assert!(certify_two_step(&t, &ak, &a1).unwrap().passed());
    }

    #[test]
    fn two_step_exact_linear_term() {
        let ak = Angle::parse("e", 128).unwrap();
        let a1 = Angle::parse("1/64", 128).unwrap();
        let t = two_step_minimize(&ak, &a1, 6, 10_000, &default_nu(6), &lim()).unwrap();
        assert_eq!(t.ell, 64);
        assert!(t.step1_value.is_zero());
    }

    #[test]
    fn two_step_generic() {
        let ak = Angle::parse("pi", 128).unwrap();
        let a1 = Angle::parse("e", 128).unwrap();
        let nu = q("1/30");
        let t = two_step_minimize(&ak, &a1, 6, 10_000, &nu, &lim()).unwrap();
        assert_eq!(t.a, q("30/61"));
        assert_eq!(t.b, q("31/61"));
        let cert = certify_two_step(&t, &ak, &a1).unwrap();
        assert!(cert.passed(), "{cert:?}");
        let c = CoefficientVector::binomial(&ak, &a1, 6).unwrap();
        assert!(min_poly(&c, 10_000, &lim()).unwrap().value <= t.final_value);

        let mut forged = t.clone();
        forged.m = t.m_bound + 1;
        assert!(!certify_two_step(&forged, &ak, &a1).unwrap().passed());
    }
}
