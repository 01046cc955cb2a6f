//! Exponents for the three small-fractional-part problems, with the
//! literature values they are compared against.
//!
//! * (i) full polynomial: `min_{n<=N} ||alpha_k n^k + ... + alpha_1 n|| << N^{-mu_k+eps}`
//! * (ii) binomial: `min_{n<=N} ||alpha_k n^k + alpha_1 n|| << N^{-rho_k+eps}`
//! * (iii) additive form: `min ||beta_1 n_1^k + ... + beta_s n_s^k|| << N^{-sigma_{s,k}+eps}`
//!
//! Exponents appear as `N^{-e}`, so a larger exponent is a stronger bound.
//! Values are exact rationals except the logarithmic family, which depends
//! on an unspecified absolute constant `B` and is reported as a float.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::arith::ratio;
use crate::error::{Error, Result};
use crate::report::Table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Problem {
    #[serde(rename = "i")]
    PolyFull,
    #[serde(rename = "ii")]
    PolyBinomial,
    #[serde(rename = "iii")]
    AdditiveForm,
}

impl Problem {
    pub const ALL: [Problem; 3] = [Problem::PolyFull, Problem::PolyBinomial, Problem::AdditiveForm];

    pub fn label(self) -> &'static str {
        match self {
            Problem::PolyFull => "i",
            Problem::PolyBinomial => "ii",
            Problem::AdditiveForm => "iii",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" | "poly-full" | "full" => Ok(Problem::PolyFull),
            "ii" | "2" | "poly-binomial" | "binomial" => Ok(Problem::PolyBinomial),
            "iii" | "3" | "additive-form" | "form" => Ok(Problem::AdditiveForm),
            _ => Err(Error::Parse(format!("unknown problem {s:?} (expected i, ii or iii)"))),
        }
    }
}

/// Source labels. `mu`, `rho`, `rho-log`, `sigma`, `sigma-f` are the
/// exponents derived from the mean-value input; `prior-*` are earlier values.
pub mod source {
    pub const MU: &str = "mu";
    pub const RHO: &str = "rho";
    pub const RHO_LOG: &str = "rho-log";
    pub const SIGMA: &str = "sigma";
    pub const SIGMA_F: &str = "sigma-f";
    pub const PRIOR_INV_K: &str = "prior-1/K";
    pub const PRIOR_QUADRATIC: &str = "prior-1/4k(k-2)";
    pub const PRIOR_FOUR_SEVENTHS: &str = "prior-4/7";
    pub const PRIOR_TABLE: &str = "prior-table";
    pub const PRIOR_S_OVER_K: &str = "prior-s/K";
    pub const PRIOR_F_K: &str = "prior-F(K)";
    pub const PRIOR_LOW_DEGREE: &str = "prior-lowdeg";
}

/// One exponent value with where it comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentRecord {
    pub problem: Problem,
    pub k: u32,
    pub s: Option<u32>,
    pub source: String,
    /// Exact value when the exponent is rational.
    #[serde(with = "opt_rational", default)]
    pub exact: Option<BigRational>,
    pub decimal: f64,
}

mod opt_rational {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| crate::arith::parse_rational(&s).map_err(D::Error::custom))
            .transpose()
    }
}

impl ExponentRecord {
    fn exact(problem: Problem, k: u32, s: Option<u32>, source: &str, value: BigRational) -> Self {
        let decimal = value.to_f64().unwrap_or(f64::NAN);
        ExponentRecord {
            problem,
            k,
            s,
            source: source.to_string(),
            exact: Some(value),
            decimal,
        }
    }

    /// Whether the value depends on an unspecified constant.
    pub fn is_parametric(&self) -> bool {
        self.exact.is_none()
    }
}

fn k_factor(k: u32) -> i64 {
    k as i64 * (k as i64 - 1)
}

/// `K = 2^{k-1}`.
pub fn big_k(k: u32) -> BigInt {
    BigInt::one() << (k.max(1) - 1)
}

/// `1 / 2k(k-1)`, for `k >= 8`.
pub fn mu(k: u32) -> Result<BigRational> {
    if k < 8 {
        return Err(Error::out_of_range("mu", "k >= 8", k));
    }
    Ok(ratio(1, 2 * k_factor(k)))
}

/// `1 / k(k-1)`, for `k >= 6`.
pub fn rho_a(k: u32) -> Result<BigRational> {
    if k < 6 {
        return Err(Error::out_of_range("rho_a", "k >= 6", k));
    }
    Ok(ratio(1, k_factor(k)))
}

/// `1 / k(2 ln k + B ln ln k)`, for `k >= 6` and `B >= 0`.
pub fn rho_b(k: u32, b: f64) -> Result<f64> {
    if k < 6 {
        return Err(Error::out_of_range("rho_b", "k >= 6", k));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::out_of_range("rho_b", "finite B >= 0", b));
    }
    let kf = k as f64;
    Ok(1.0 / (kf * (2.0 * kf.ln() + b * kf.ln().ln())))
}

/// Exponent `nu / (2 + nu)` of the two-step construction fed by a monomial
/// exponent `nu`.
pub fn two_step_exponent(nu: &BigRational) -> Result<BigRational> {
    if !nu.is_positive() {
        return Err(Error::out_of_range("two_step_exponent", "nu > 0", nu));
    }
    Ok(nu / (BigRational::from_integer(2.into()) + nu))
}

/// `1 / k(ln k + C ln ln k)`, the monomial exponent with constant `C`.
pub fn log_monomial_exponent(k: u32, c: f64) -> f64 {
    let kf = k as f64;
    1.0 / (kf * (kf.ln() + c * kf.ln().ln()))
}

/// `s / k(k-1)`, for `k >= 6`, `1 <= s <= k(k-1)`.
pub fn sigma_small(s: u32, k: u32) -> Result<BigRational> {
    if k < 6 {
        return Err(Error::out_of_range("sigma_small", "k >= 6", k));
    }
    let j = k_factor(k);
    if s == 0 || s as i64 > j {
        return Err(Error::out_of_range(
            "sigma_small",
            format!("1 <= s <= k(k-1) = {j}; use the F formula above that"),
            s,
        ));
    }
    Ok(ratio(s as i64, j))
}

/// `F(J, s, k) = min(s/J, max_{J+1<=h<=s} min(((2h-2)(s-k)+4k-4)/(h(s-k)+4h-4), (s-h+J+1)/J))`,
/// with integer `h`; requires `s > J >= 1`.
pub fn f_formula(j: u32, s: u32, k: u32) -> Result<BigRational> {
    if j == 0 {
        return Err(Error::out_of_range("F", "J >= 1", j));
    }
    if s <= j {
        return Err(Error::out_of_range("F", format!("s > J = {j}"), s));
    }
    if k == 0 {
        return Err(Error::out_of_range("F", "k >= 1", k));
    }
    let (j, s, k) = (j as i64, s as i64, k as i64);
    let mut best: Option<BigRational> = None;
    for h in j + 1..=s {
        let den = h * (s - k) + 4 * h - 4;
        if den == 0 {
            return Err(Error::Domain(format!("F: zero denominator at h = {h}")));
        }
        let first = ratio((2 * h - 2) * (s - k) + 4 * k - 4, den);
        let second = ratio(s - h + j + 1, j);
        let inner = first.min(second);
        if best.as_ref().is_none_or(|b| inner > *b) {
            best = Some(inner);
        }
    }
    let outer = ratio(s, j);
    Ok(outer.min(best.expect("h range is nonempty")))
}

/// `sigma_{s,k}` for `k >= 6`: `s/k(k-1)` up to `s = k(k-1)`, then
/// `F(k(k-1), s, k)`.
pub fn sigma(s: u32, k: u32) -> Result<BigRational> {
    if k < 6 {
        return Err(Error::out_of_range("sigma", "k >= 6", k));
    }
    let j = k_factor(k) as u32;
    if s <= j {
        sigma_small(s, k)
    } else {
        f_formula(j, s, k)
    }
}

/// Decimal literature constants for the binomial problem, `rho_k = 1/d`.
/// Values for `12 <= k <= 19` are not listed in the comparison source.
pub const BINOMIAL_TABLE: [(u32, &str); 6] = [
    (7, "57.23"),
    (8, "69.66"),
    (9, "82.08"),
    (10, "94.62"),
    (11, "107.27"),
    (20, "222.16"),
];

fn decimal_reciprocal(d: &str) -> BigRational {
    let x = crate::arith::parse_rational(d).expect("well-formed constant");
    x.recip()
}

/// Exponents from this crate's constructions that apply at `(problem, k, s)`.
/// The logarithmic family is included only when `b` is given.
pub fn current_exponents(problem: Problem, k: u32, s: Option<u32>, b: Option<f64>) -> Vec<ExponentRecord> {
    let mut out = Vec::new();
    match problem {
        Problem::PolyFull => {
            if let Ok(v) = mu(k) {
                out.push(ExponentRecord::exact(problem, k, None, source::MU, v));
            }
        }
        Problem::PolyBinomial => {
            if let Ok(v) = rho_a(k) {
                out.push(ExponentRecord::exact(problem, k, None, source::RHO, v));
            }
            if let Some(b) = b {
                if let Ok(v) = rho_b(k, b) {
                    out.push(ExponentRecord {
                        problem,
                        k,
                        s: None,
                        source: format!("{}(B={b})", source::RHO_LOG),
                        exact: None,
                        decimal: v,
                    });
                }
            }
        }
        Problem::AdditiveForm => {
            if let Some(s) = s {
                if let Ok(v) = sigma_small(s, k) {
                    out.push(ExponentRecord::exact(problem, k, Some(s), source::SIGMA, v));
                } else if k >= 6 && s as i64 > k_factor(k) {
                    if let Ok(v) = f_formula(k_factor(k) as u32, s, k) {
                        out.push(ExponentRecord::exact(problem, k, Some(s), source::SIGMA_F, v));
                    }
                }
            }
        }
    }
    out
}

/// Earlier exponents for `(problem, k, s)`.
pub fn prior_exponents(problem: Problem, k: u32, s: Option<u32>) -> Vec<ExponentRecord> {
    let mut out = Vec::new();
    if k < 2 {
        return out;
    }
    let kk = BigRational::from_integer(big_k(k));
    let rec = |src: &str, v: BigRational| ExponentRecord::exact(problem, k, s, src, v);
    match problem {
        Problem::PolyFull => {
            if k <= 8 {
                out.push(rec(source::PRIOR_INV_K, kk.recip()));
            } else {
                out.push(rec(source::PRIOR_QUADRATIC, ratio(1, 4 * k as i64 * (k as i64 - 2))));
            }
        }
        Problem::PolyBinomial => {
            if k == 2 {
                out.push(rec(source::PRIOR_FOUR_SEVENTHS, ratio(4, 7)));
            } else if k <= 6 {
                out.push(rec(source::PRIOR_INV_K, kk.recip()));
            }
            if let Some((_, d)) = BINOMIAL_TABLE.iter().find(|(kt, _)| *kt == k) {
                out.push(rec(source::PRIOR_TABLE, decimal_reciprocal(d)));
            }
        }
        Problem::AdditiveForm => {
            let Some(sv) = s else { return out };
            if sv == 0 {
                return out;
            }
            let s_big = BigRational::from_integer(sv.into());
            if s_big <= kk {
                out.push(rec(source::PRIOR_S_OVER_K, s_big / kk));
            } else if k >= 4 {
                let kv = big_k(k).to_u32().expect("K fits");
                if let Ok(v) = f_formula(kv, sv, k) {
                    out.push(rec(source::PRIOR_F_K, v));
                }
            } else if (k, sv) == (2, 3) {
                out.push(rec(source::PRIOR_LOW_DEGREE, ratio(9, 8)));
            } else if (k, sv) == (3, 5) {
                out.push(rec(source::PRIOR_LOW_DEGREE, ratio(5, 4)));
            }
        }
    }
    out
}

/// A table row: a record and whether it is the strongest rational exponent
/// of its `(problem, k, s)` cell. Parametric rows are never winners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    #[serde(flatten)]
    pub record: ExponentRecord,
    pub winner: bool,
}

/// Current and prior exponents for every cell; `s_values` applies to the
/// additive-form problem only.
pub fn exponent_table(
    problems: &[Problem],
    k_values: &[u32],
    s_values: &[u32],
    b: Option<f64>,
) -> Result<Vec<ExponentRow>> {
    if problems.is_empty() || k_values.is_empty() {
        return Err(Error::Domain("exponent table needs problems and k values".into()));
    }
    if problems.contains(&Problem::AdditiveForm) && s_values.is_empty() {
        return Err(Error::Domain("additive-form rows need s values".into()));
    }
    let mut rows = Vec::new();
    for &problem in problems {
        for &k in k_values {
            let cells: Vec<Option<u32>> = if problem == Problem::AdditiveForm {
                s_values.iter().map(|&s| Some(s)).collect()
            } else {
                vec![None]
            };
            for s in cells {
                let mut cell = current_exponents(problem, k, s, b);
                cell.extend(prior_exponents(problem, k, s));
                let best = cell.iter().filter_map(|r| r.exact.clone()).max();
                rows.extend(cell.into_iter().map(|record| {
                    let winner = record.exact.is_some() && record.exact == best;
                    ExponentRow { record, winner }
                }));
            }
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: [&str; 7] = [
    "problem",
    "k",
    "s",
    "source",
    "exponent_exact",
    "exponent_decimal",
    "winner",
];

pub fn table(rows: &[ExponentRow]) -> Table {
    let mut t = Table::new(CSV_HEADER);
    for r in rows {
        let rec = &r.record;
        t.push([
            rec.problem.to_string(),
            rec.k.to_string(),
            rec.s.map(|s| s.to_string()).unwrap_or_default(),
            rec.source.clone(),
            rec.exact.as_ref().map(|x| x.to_string()).unwrap_or_default(),
            rec.decimal.to_string(),
            r.winner.to_string(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        ratio(a, b)
    }

    /// Direct transcription of F in floating point, as an independent check
    /// on the exact version (far from ties).
    fn f_float(j: u32, s: u32, k: u32) -> f64 {
        let (j, s, k) = (j as f64, s as f64, k as f64);
        let mut best = f64::NEG_INFINITY;
        let mut h = j + 1.0;
        while h <= s {
            let a = ((2.0 * h - 2.0) * (s - k) + 4.0 * k - 4.0) / (h * (s - k) + 4.0 * h - 4.0);
            let b = (s - h + j + 1.0) / j;
            best = best.max(a.min(b));
            h += 1.0;
        }
        (s / j).min(best)
    }

    #[test]
    fn headline_exponents() {
        assert_eq!(mu(8).unwrap(), r(1, 112));
        assert_eq!(mu(9).unwrap(), r(1, 144));
        assert_eq!(mu(10).unwrap(), r(1, 180));
        assert!(mu(7).is_err());
        assert_eq!(rho_a(6).unwrap(), r(1, 30));
        assert_eq!(rho_a(7).unwrap(), r(1, 42));
        assert_eq!(rho_a(20).unwrap(), r(1, 380));
        assert!(rho_a(5).is_err());
        assert_eq!(sigma_small(30, 6).unwrap(), r(1, 1));
        assert_eq!(sigma_small(1, 6).unwrap(), r(1, 30));
        assert_eq!(sigma_small(7, 7).unwrap(), r(1, 6));
        assert!(sigma_small(31, 6).is_err());
    }

    #[test]
    fn logarithmic_family() {
        let v = rho_b(6, 0.0).unwrap();
        assert!((1.0 / v - 12.0 * 6f64.ln()).abs() < 1e-12);
        assert!((1.0 / v - 21.501).abs() < 1e-3);
        assert!(rho_b(7, 1.0).unwrap() < rho_b(6, 1.0).unwrap());
        assert!(rho_b(5, 1.0).is_err());
    }

    #[test]
    fn two_step_composition() {
        // nu = 1/222.16 gives 1/(2 * 222.16 + 1) = 1/445.32
        let nu = decimal_reciprocal("222.16");
        assert_eq!(two_step_exponent(&nu).unwrap(), decimal_reciprocal("445.32"));
        // with nu = 1/k(ln k + C ln ln k), nu/(2+nu) = 1/(2k ln k + 2Ck ln ln k + 1)
        for k in [6u32, 10, 50] {
            for c in [0.0, 0.5, 3.0] {
                let nu = log_monomial_exponent(k, c);
                let kf = k as f64;
                let want = 1.0 / (2.0 * kf * kf.ln() + 2.0 * c * kf * kf.ln().ln() + 1.0);
                assert!((nu / (2.0 + nu) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn f_formula_cases() {
        // h = 31 only: min(1520/895, 31/30) = 31/30
        assert_eq!(f_formula(30, 31, 6).unwrap(), r(31, 30));
        assert!(f_formula(30, 30, 6).is_err());
        for s in 31..=54 {
            assert_eq!(f_formula(30, s, 6).unwrap(), r(s as i64, 30), "s={s}");
        }
        // the identity with s/30 stops after s = 54
        assert_eq!(f_formula(30, 55, 6).unwrap(), r(2960, 1639));
        assert_eq!(f_formula(30, 56, 6).unwrap(), r(780, 431));
        assert!(f_formula(30, 57, 6).unwrap() < r(57, 30));
        for (j, s, k) in [(30, 80, 6), (42, 60, 7), (32, 40, 6), (8, 20, 4), (56, 300, 8)] {
            let exact = f_formula(j, s, k).unwrap().to_f64().unwrap();
            assert!((exact - f_float(j, s, k)).abs() < 1e-12);
            assert!(f_formula(j, s, k).unwrap() <= r(s as i64, j as i64));
        }
    }

    #[test]
    fn sigma_monotone_and_continuous_at_boundary() {
        for k in 6..9 {
            assert_eq!(sigma(1, k).unwrap(), rho_a(k).unwrap());
            let j = k * (k - 1);
            for s in 1..j {
                assert!(sigma_small(s + 1, k).unwrap() > sigma_small(s, k).unwrap());
            }
            assert!(mu(k.max(8)).unwrap() < rho_a(k.max(8)).unwrap());
        }
    }

    #[test]
    fn priors() {
        let p = prior_exponents(Problem::PolyFull, 8, None);
        assert_eq!(p[0].exact, Some(r(1, 128)));
        let p = prior_exponents(Problem::PolyFull, 9, None);
        assert_eq!(p[0].exact, Some(r(1, 252)));
        let p = prior_exponents(Problem::PolyBinomial, 7, None);
        assert_eq!(p[0].exact, Some(r(100, 5723)));
        assert!(prior_exponents(Problem::PolyBinomial, 15, None).is_empty());
        assert_eq!(prior_exponents(Problem::PolyBinomial, 2, None)[0].exact, Some(r(4, 7)));
        assert_eq!(
            prior_exponents(Problem::AdditiveForm, 6, Some(5))[0].exact,
            Some(r(5, 32))
        );
        assert_eq!(
            prior_exponents(Problem::AdditiveForm, 2, Some(3))[0].exact,
            Some(r(9, 8))
        );
        assert_eq!(
            prior_exponents(Problem::AdditiveForm, 3, Some(5))[0].exact,
            Some(r(5, 4))
        );
        assert_eq!(
            prior_exponents(Problem::AdditiveForm, 6, Some(40))[0].source,
            source::PRIOR_F_K
        );
    }

    #[test]
    fn winners() {
        let rows = exponent_table(&Problem::ALL, &[8, 10, 11, 20], &[1], None).unwrap();
        let winner = |p: Problem, k: u32| {
            rows.iter()
                .find(|r| r.record.problem == p && r.record.k == k && r.winner)
                .map(|r| r.record.source.clone())
                .unwrap()
        };
        assert_eq!(winner(Problem::PolyFull, 8), source::MU);
        assert_eq!(winner(Problem::PolyBinomial, 10), source::RHO);
        assert_eq!(winner(Problem::PolyBinomial, 11), source::PRIOR_TABLE);
        assert_eq!(winner(Problem::PolyBinomial, 20), source::PRIOR_TABLE);

        let rows = exponent_table(&[Problem::PolyBinomial], &[6], &[], Some(1.0)).unwrap();
        let log_row = rows.iter().find(|r| r.record.is_parametric()).unwrap();
        assert!(!log_row.winner);
        assert!(log_row.record.source.contains("B=1"));
    }

    #[test]
    fn csv_layout() {
        let rows = exponent_table(&[Problem::AdditiveForm], &[6], &[1, 2], None).unwrap();
        let text = table(&rows).to_csv().unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "problem,k,s,source,exponent_exact,exponent_decimal,winner"
        );
        assert_eq!(lines.next().unwrap(), "iii,6,1,sigma,1/30,0.03333333333333333,true");
        assert_eq!(lines.next().unwrap(), "iii,6,1,prior-s/K,1/32,0.03125,false");
    }

    #[test]
    fn problem_names() {
        for p in Problem::ALL {
            assert_eq!(p.label().parse::<Problem>().unwrap(), p);
        }
        assert!("iv".parse::<Problem>().is_err());
    }
}
