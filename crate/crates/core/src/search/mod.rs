//! Exhaustive minimizers of `||P(n)||` and of additive forms, plus the
//! constructive pipelines in [`pipeline`].
//!
//! Ranges are split into fixed blocks; each block keeps its best
//! `(value, argument)` and blocks are reduced in order, so ties always go to
//! the smallest `n` (lexicographically smallest tuple for forms) whatever the
//! thread count.

pub mod pipeline;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{Angle, Fixed, FracDistance};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::weyl::CoefficientVector;

const BLOCK: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Argmin {
    Single(u64),
    Tuple(Vec<u64>),
}

/// A minimum with the argument attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinResult {
    pub argmin: Argmin,
    pub value: FracDistance,
    /// Search bound.
    #[serde(rename = "N")]
    pub n: u64,
    pub evaluations: u64,
}

/// `|| sum_j alpha_j n^j ||`, evaluated with full integer powers.
pub fn evaluate_poly(c: &CoefficientVector, n: u64) -> FracDistance {
    c.phase_big(&n.into()).frac_distance()
}

/// `|| sum_i beta_i n_i^k ||`, evaluated with full integer powers.
pub fn evaluate_form(betas: &[Angle], k: u32, ns: &[u64]) -> Result<FracDistance> {
    if betas.len() != ns.len() || betas.is_empty() {
        return Err(Error::Domain("need one coordinate per coefficient".into()));
    }
    let mut acc = Angle::zero(betas[0].precision())?;
    for (b, &n) in betas.iter().zip(ns) {
        acc = acc.add(&b.mul_pow_mod1_big(&n.into(), k))?;
    }
    Ok(acc.frac_distance())
}

/// `min_{1<=n<=N} || alpha_k n^k + ... + alpha_1 n ||`, smallest `n` on ties.
pub fn min_poly(c: &CoefficientVector, n: u64, limits: &Limits) -> Result<MinResult> {
    if n == 0 {
        return Err(Error::out_of_range("min_poly", "N >= 1", n));
    }
    if n > limits.poly_budget {
        return Err(Error::budget("min_poly", n, limits.poly_budget));
    }
    let blocks = n.div_ceil(BLOCK);
    let (value, arg) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK + 1;
            let end = ((b + 1) * BLOCK).min(n);
            let mut phase = Fixed::zero(c.precision());
            let mut dist = Fixed::zero(c.precision());
            let mut best = Fixed::zero(c.precision());
            let mut best_n = 0;
            for m in start..=end {
                c.phase_into(m, &mut phase);
                phase.distance_into(&mut dist);
                if best_n == 0 || dist < best {
                    best.copy_from(&dist);
                    best_n = m;
                }
            }
            (best, best_n)
        })
        .min()
        .expect("at least one block");
    Ok(MinResult {
        argmin: Argmin::Single(arg),
        value: FracDistance::from_distance_bits(value),
        n,
        evaluations: n,
    })
}

/// `min || beta_1 n_1^k + ... + beta_s n_s^k ||` over `0 <= n_i <= N`, not
/// all zero; lexicographically smallest tuple on ties.
pub fn min_additive_form(betas: &[Angle], k: u32, n: u64, limits: &Limits) -> Result<MinResult> {
    let s = betas.len();
    if s == 0 {
        return Err(Error::out_of_range("min_additive_form", "s >= 1", s));
    }
    if k == 0 {
        return Err(Error::out_of_range("min_additive_form", "k >= 1", k));
    }
    if n == 0 {
        return Err(Error::out_of_range("min_additive_form", "N >= 1", n));
    }
    let prec = betas[0].precision();
    if betas.iter().any(|b| b.precision() != prec) {
        return Err(Error::Domain("all coefficients must share one precision".into()));
    }
    let points = (n as u128 + 1)
        .checked_pow(s as u32)
        .map(|p| p - 1)
        .unwrap_or(u128::MAX);
    if points > limits.form_budget as u128 {
        return Err(Error::Budget {
            what: "min_additive_form",
            estimated: format!("{points} (reduce N or s, or minimize coordinates separately)"),
            budget: limits.form_budget,
        });
    }
    // table[i][m] = beta_i m^k mod 1
    let table: Vec<Vec<Fixed>> = betas
        .iter()
        .map(|b| (0..=n).map(|m| b.mul_pow_mod1(m, k).fixed().clone()).collect())
        .collect();
    let (value, tuple) = (0..=n)
        .into_par_iter()
        .filter_map(|first| form_slice(&table, first, n))
        .min()
        .expect("punctured box is nonempty");
    Ok(MinResult {
        argmin: Argmin::Tuple(tuple),
        value: FracDistance::from_distance_bits(value),
        n,
        evaluations: points as u64,
    })
}

/// Best point with `n_1 = first`, enumerating the rest lexicographically.
fn form_slice(table: &[Vec<Fixed>], first: u64, n: u64) -> Option<(Fixed, Vec<u64>)> {
    let s = table.len();
    let prec = table[0][0].precision();
    let mut tuple = vec![0u64; s];
    tuple[0] = first;
    // prefix[d] = sum of the first d + 1 terms
    let mut prefix: Vec<Fixed> = vec![Fixed::zero(prec); s];
    prefix[0].copy_from(&table[0][first as usize]);
    for d in 1..s {
        let (lo, hi) = prefix.split_at_mut(d);
        hi[0].copy_from(&lo[d - 1]);
        hi[0].add_assign(&table[d][0]);
    }
    let mut dist = Fixed::zero(prec);
    let mut best: Option<(Fixed, Vec<u64>)> = None;
    loop {
        if tuple.iter().any(|&x| x != 0) {
            prefix[s - 1].distance_into(&mut dist);
            if best.as_ref().is_none_or(|(b, _)| dist < *b) {
                best = Some((dist.clone(), tuple.clone()));
            }
        }
        // odometer step on coordinates 1..s
        let mut d = s - 1;
        loop {
            if d == 0 {
                return best;
            }
            if tuple[d] < n {
                tuple[d] += 1;
                break;
            }
            tuple[d] = 0;
            d -= 1;
        }
        for e in d..s {
            let (lo, hi) = prefix.split_at_mut(e);
            hi[0].copy_from(&lo[e - 1]);
            hi[0].add_assign(&table[e][tuple[e] as usize]);
        }
    }
}

/// Least-squares fit of `ln value = slope * ln N + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// `(N, ln value - fitted)` for each point used.
    pub residuals: Vec<(u64, f64)>,
    /// Search bounds dropped because the minimum was zero.
    pub excluded_zero: Vec<u64>,
}

/// Log-log slope of minima against `N`. Zero minima (rational coefficients)
/// are excluded and listed; at least three distinct `N` must remain.
pub fn exponent_fit(points: &[(u64, f64)]) -> Result<ExponentFit> {
    let excluded_zero: Vec<u64> = points.iter().filter(|p| p.1 == 0.0).map(|p| p.0).collect();
    let used: Vec<(u64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
    if points.iter().any(|p| p.1 < 0.0 || !p.1.is_finite()) {
        return Err(Error::Domain("minima must be finite and non-negative".into()));
    }
    let mut distinct: Vec<u64> = used.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 || distinct[0] == 0 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 distinct N >= 1 with nonzero minima, have {} (excluded zero minima at {:?})",
            distinct.len(),
            excluded_zero
        )));
    }
    let xs: Vec<f64> = used.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = used
        .iter()
        .zip(xs.iter().zip(&ys))
        .map(|(p, (x, y))| (p.0, y - (slope * x + intercept)))
        .collect();
    Ok(ExponentFit {
        slope,
        intercept,
        residuals,
        excluded_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::angle_from_rational;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn rational_vectors_reach_zero() {
        let c = CoefficientVector::parse(&["3/16", "5/8", "1/16"], 64).unwrap();
        let r = min_poly(&c, 100, &lim()).unwrap();
        assert!(r.value.is_zero());
        match r.argmin {
            Argmin::Single(n) => assert!(n <= 16),
            _ => panic!("expected single argmin"),
        }
    }

    #[test]
    fn golden_ratio_linear() {
        let c = CoefficientVector::parse(&["phi"], 128).unwrap();
        let r = min_poly(&c, 13, &lim()).unwrap();
        assert_eq!(r.argmin, Argmin::Single(13));
        assert!((r.value.to_f64() - 0.034441853748633).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_smallest_n() {
        // n(n+1)/2 is an integer for every n
        let c = CoefficientVector::parse(&["1/2", "1/2"], 32).unwrap();
        let r = min_poly(&c, 4, &lim()).unwrap();
        assert_eq!(r.argmin, Argmin::Single(1));
        assert!(r.value.is_zero());
        let c = CoefficientVector::parse(&["1/2"], 32).unwrap();
        assert_eq!(min_poly(&c, 10, &lim()).unwrap().argmin, Argmin::Single(2));
    }

    #[test]
    fn forms() {
        let half = Angle::parse("1/2", 64).unwrap();
        let r = min_additive_form(&[half.clone(), half], 6, 1, &lim()).unwrap();
        assert_eq!(r.argmin, Argmin::Tuple(vec![1, 1]));
        assert!(r.value.is_zero());

        let b1 = Angle::parse("1/3", 64).unwrap();
        let b2 = Angle::parse("1/5", 64).unwrap();
        let r = min_additive_form(&[b1.clone(), b2.clone()], 2, 4, &lim()).unwrap();
        assert_eq!(r.evaluations, 24);
        // oracle: every point of the punctured box
        let mut best: Option<(FracDistance, Vec<u64>)> = None;
        for x in 0..=4u64 {
            for y in 0..=4u64 {
                if (x, y) == (0, 0) {
                    continue;
                }
                let v = evaluate_form(&[b1.clone(), b2.clone()], 2, &[x, y]).unwrap();
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, vec![x, y]));
                }
            }
        }
        let (v, t) = best.unwrap();
        assert_eq!(r.value, v);
        assert_eq!(r.argmin, Argmin::Tuple(t));

        let small = Limits::with_budget(100);
        assert!(matches!(
            min_additive_form(&[b1.clone(), b1.clone(), b1], 2, 10, &small),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn fits() {
        let exact: Vec<(u64, f64)> = [10u64, 100, 1000].iter().map(|&n| (n, 3.0 / n as f64)).collect();
        assert!((exponent_fit(&exact).unwrap().slope + 1.0).abs() < 1e-12);
        let flat = [(10, 0.2), (100, 0.2), (1000, 0.2)];
        assert!(exponent_fit(&flat).unwrap().slope.abs() < 1e-12);
        let with_zero = [(10, 0.2), (100, 0.0), (1000, 0.2), (10_000, 0.2)];
        let f = exponent_fit(&with_zero).unwrap();
        assert_eq!(f.excluded_zero, vec![100]);
        assert!(matches!(
            exponent_fit(&[(10, 0.1), (20, 0.0), (30, 0.1)]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn golden_ratio_fibonacci_slope() {
        let c = CoefficientVector::parse(&["phi"], 128).unwrap();
        let fib = [13u64, 89, 610, 4181, 28657, 196418];
        let pts: Vec<(u64, f64)> = fib
            .iter()
            .map(|&n| (n, min_poly(&c, n, &lim()).unwrap().value.to_f64()))
            .collect();
        let f = exponent_fit(&pts).unwrap();
        assert!((f.slope + 1.0).abs() < 0.01, "slope {}", f.slope);
    }

    #[test]
    fn refuses_over_budget() {
        let c = CoefficientVector::parse(&["pi"], 64).unwrap();
        assert!(matches!(
            min_poly(&c, 1000, &Limits::with_budget(999)),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let c = CoefficientVector::parse(&["e", "0", "pi"], 128).unwrap();
        let betas = vec![Angle::parse("pi", 96).unwrap(), Angle::parse("e", 96).unwrap()];
        let run = |t| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .unwrap()
                .install(|| {
                    (
                        min_poly(&c, 50_000, &lim()).unwrap(),
                        min_additive_form(&betas, 3, 150, &lim()).unwrap(),
                    )
                })
        };
        assert_eq!(run(1), run(3));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn argmin_value_reproduces(nums in proptest::collection::vec(any::<u64>(), 1..6), n in 1u64..3000) {
            let coeffs = nums.iter().map(|&x| Angle::new(BigUint::from(x), 64).unwrap()).collect();
            let c = CoefficientVector::new(coeffs).unwrap();
            let r = min_poly(&c, n, &lim()).unwrap();
            let Argmin::Single(m) = r.argmin else { panic!() };
            prop_assert!(1 <= m && m <= n);
            prop_assert_eq!(evaluate_poly(&c, m), r.value);
        }

        #[test]
        fn min_nonincreasing_in_n(x in any::<u64>(), y in any::<u64>(), n in 1u64..2000) {
            let c = CoefficientVector::new(vec![
                Angle::new(BigUint::from(x), 64).unwrap(),
                Angle::new(BigUint::from(y), 64).unwrap(),
            ]).unwrap();
            prop_assert!(min_poly(&c, n + 1, &lim()).unwrap().value <= min_poly(&c, n, &lim()).unwrap().value);
        }

        #[test]
        fn single_variable_form_is_monomial(x in any::<u64>(), k in 6u32..8, n in 1u64..200) {
            let beta = Angle::new(BigUint::from(x), 64).unwrap();
            let f = min_additive_form(std::slice::from_ref(&beta), k, n, &lim()).unwrap();
            let p = min_poly(&CoefficientVector::monomial(&beta, k).unwrap(), n, &lim()).unwrap();
            prop_assert_eq!(f.value, p.value);
            let Argmin::Tuple(t) = f.argmin else { panic!() };
            prop_assert_eq!(Argmin::Single(t[0]), p.argmin);
        }

        #[test]
        fn dyadic_vectors_hit_zero(t in 0u32..8, nums in proptest::collection::vec(0i64..256, 1..6)) {
            let q = 1u64 << t;
            let coeffs = nums.iter().map(|&a| angle_from_rational(a, q, 64).unwrap()).collect();
            let c = CoefficientVector::new(coeffs).unwrap();
            prop_assert!(min_poly(&c, q.max(1), &lim()).unwrap().value.is_zero());
        }
    }
}
