//! Exact Vinogradov mean values `J_{s,k}(N)`.
//!
//! `J_{s,k}(N)` counts pairs of tuples in `[1, N]^s` whose power sums agree
//! in every degree `1..=k`. With `m(v)` the number of tuples having power-sum
//! vector `v`, the count is `sum_v m(v)^2`.
//!
//! Tuples are enumerated as multisets (nondecreasing sequences) weighted by
//! their number of orderings, so the work is about `N^s / s!` rather than
//! `N^s`. The budget is still judged on `N^s`. Work is partitioned on the
//! smallest element; per-part multiplicity maps are merged by key.

use std::collections::HashMap;
use std::hash::Hash;
use std::ops::Add;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::error::{Error, Result};
use crate::report::Table;

/// `J_{s,k}(N)` together with the conjectured reference curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeanValueCount {
    pub s: u32,
    pub k: u32,
    pub n: u64,
    #[serde(with = "crate::serde_big::uint")]
    pub count: BigUint,
    #[serde(with = "crate::serde_big::uint")]
    pub bound_main: BigUint,
    #[serde(with = "crate::serde_big::rational")]
    pub bound_secondary: BigRational,
}

impl MeanValueCount {
    /// `count / max(bound_main, bound_secondary)`.
    pub fn ratio(&self) -> f64 {
        let main = BigRational::from_integer(BigInt::from(self.bound_main.clone()));
        let denom = if self.bound_secondary > main {
            self.bound_secondary.clone()
        } else {
            main
        };
        let r = BigRational::from_integer(BigInt::from(self.count.clone())) / denom;
        r.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// `(N^s, N^{2s - k(k+1)/2})`, exact.
pub fn conjecture_bound(s: u32, k: u32, n: u64) -> (BigUint, BigRational) {
    let base = BigUint::from(n);
    let main = base.pow(s);
    let e = 2 * s as i64 - (k as i64) * (k as i64 + 1) / 2;
    let p = BigInt::from(base.pow(e.unsigned_abs() as u32));
    let secondary = if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    };
    (main, secondary)
}

fn check_args(s: u32, k: u32, n: u64) -> Result<()> {
    if s == 0 {
        return Err(Error::out_of_range("vinogradov_count", "s >= 1", s));
    }
    if k == 0 {
        return Err(Error::out_of_range("vinogradov_count", "k >= 1", k));
    }
    if n == 0 {
        return Err(Error::out_of_range("vinogradov_count", "N >= 1", n));
    }
    Ok(())
}

/// Exact `J_{s,k}(N)`; refuses when `N^s` exceeds the tuple budget.
pub fn vinogradov_count(s: u32, k: u32, n: u64, limits: &Limits) -> Result<MeanValueCount> {
    check_args(s, k, n)?;
    let (bound_main, bound_secondary) = conjecture_bound(s, k, n);
    if bound_main > BigUint::from(limits.count_budget) {
        return Err(Error::budget("vinogradov_count", &bound_main, limits.count_budget));
    }
    let count = if n == 1 {
        BigUint::one()
    } else {
        count_multisets(s, k, n)
    };
    Ok(MeanValueCount {
        s,
        k,
        n,
        count,
        bound_main,
        bound_secondary,
    })
}

fn count_multisets(s: u32, k: u32, n: u64) -> BigUint {
    // largest power sum is s * N^k; pick the narrowest exact representation
    let top = BigUint::from(s) * BigUint::from(n).pow(k);
    if top.bits() < 127 {
        let powers: Vec<Vec<u128>> = (0..=n)
            .map(|x| {
                let mut row = Vec::with_capacity(k as usize);
                let mut p = 1u128;
                for _ in 0..k {
                    p *= x as u128;
                    row.push(p);
                }
                row
            })
            .collect();
        let widths: Vec<u32> = (1..=k)
            .map(|j| {
                let m = BigUint::from(s) * BigUint::from(n).pow(j);
                m.bits() as u32
            })
            .collect();
        if widths.iter().sum::<u32>() <= 128 {
            let key = |sums: &[u128]| {
                let mut packed = 0u128;
                for (v, w) in sums.iter().zip(&widths) {
                    packed = (packed << w) | v;
                }
                packed
            };
            square_sum(s, n, &powers, key)
        } else {
            square_sum(s, n, &powers, |sums: &[u128]| sums.to_vec())
        }
    } else {
        let powers: Vec<Vec<BigUint>> = (0..=n)
            .map(|x| (1..=k).map(|j| BigUint::from(x).pow(j)).collect())
            .collect();
        square_sum(s, n, &powers, |sums: &[BigUint]| sums.to_vec())
    }
}

fn square_sum<T, K, F>(s: u32, n: u64, powers: &[Vec<T>], key: F) -> BigUint
where
    T: Clone + Zero + Send + Sync,
    for<'a> &'a T: Add<&'a T, Output = T>,
    K: Hash + Eq + Send,
    F: Fn(&[T]) -> K + Sync,
{
    let k = powers[0].len();
    let parts: Vec<HashMap<K, u128>> = (1..=n)
        .into_par_iter()
        .map(|first| {
            let mut map = HashMap::new();
            let mut walker = Walker {
                s: s as usize,
                n,
                powers,
                key: &key,
                sums: vec![vec![T::zero(); k]; s as usize + 1],
                map: &mut map,
            };
            walker.push(0, first, 1, 1);
            map
        })
        .collect();
    let mut merged: HashMap<K, u128> = HashMap::new();
    for part in parts {
        if merged.is_empty() {
            merged = part;
            continue;
        }
        for (k, w) in part {
            *merged.entry(k).or_insert(0) += w;
        }
    }
    let total: u128 = merged.values().map(|m| m * m).sum();
    BigUint::from(total)
}

struct Walker<'a, T, K, F> {
    s: usize,
    n: u64,
    powers: &'a [Vec<T>],
    key: &'a F,
    /// `sums[d]` holds the power sums of the first `d` elements.
    sums: Vec<Vec<T>>,
    map: &'a mut HashMap<K, u128>,
}

impl<T, K, F> Walker<'_, T, K, F>
where
    T: Clone,
    for<'b> &'b T: Add<&'b T, Output = T>,
    K: Hash + Eq,
    F: Fn(&[T]) -> K,
{
    /// Places `value` at position `depth`; `run` is its multiplicity so far
    /// and `weight` the number of orderings of the prefix including it.
    fn push(&mut self, depth: usize, value: u64, run: u128, weight: u128) {
        let (done, rest) = self.sums.split_at_mut(depth + 1);
        for (j, out) in rest[0].iter_mut().enumerate() {
            *out = &done[depth][j] + &self.powers[value as usize][j];
        }
        let len = depth + 1;
        if len == self.s {
            let key = (self.key)(&self.sums[len]);
            *self.map.entry(key).or_insert(0) += weight;
            return;
        }
        // orderings of a multiset grow by (len + 1) / (new run length)
        let grow = len as u128 + 1;
        self.push(len, value, run + 1, weight * grow / (run + 1));
        for next in value + 1..=self.n {
            self.push(len, next, 1, weight * grow);
        }
    }
}

/// Reference count comparing power sums of every pair of tuples.
///
/// Cost `N^{2s}`; intended only as an independent check on small inputs.
pub fn pairwise_count(s: u32, k: u32, n: u64) -> Result<BigUint> {
    check_args(s, k, n)?;
    let total = BigUint::from(n)
        .pow(s)
        .to_u64()
        .filter(|t| *t <= 1 << 20)
        .ok_or_else(|| Error::budget("pairwise_count", BigUint::from(n).pow(s), 1 << 20))?;
    let vectors: Vec<Vec<BigUint>> = (0..total)
        .map(|mut idx| {
            let mut sums = vec![BigUint::zero(); k as usize];
            for _ in 0..s {
                let x = BigUint::from(idx % n + 1);
                idx /= n;
                for (j, acc) in sums.iter_mut().enumerate() {
                    *acc += x.pow(j as u32 + 1);
                }
            }
            sums
        })
        .collect();
    let mut count = 0u64;
    for a in &vectors {
        for b in &vectors {
            if a == b {
                count += 1;
            }
        }
    }
    Ok(BigUint::from(count))
}

/// One cell of a mean-value sweep. Refused cells carry no count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanValueRow {
    pub s: u32,
    pub k: u32,
    pub n: u64,
    #[serde(with = "crate::serde_big::opt_uint")]
    pub count: Option<BigUint>,
    #[serde(with = "crate::serde_big::uint")]
    pub bound_main: BigUint,
    #[serde(with = "crate::serde_big::rational")]
    pub bound_secondary: BigRational,
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub refusal: Option<String>,
}

impl From<&MeanValueCount> for MeanValueRow {
    fn from(c: &MeanValueCount) -> Self {
        MeanValueRow {
            s: c.s,
            k: c.k,
            n: c.n,
            count: Some(c.count.clone()),
            bound_main: c.bound_main.clone(),
            bound_secondary: c.bound_secondary.clone(),
            ratio: Some(c.ratio()),
            refusal: None,
        }
    }
}

/// Every cell of `s_values x k_values x n_values`; a refused cell is kept
/// with its reason and does not stop the sweep.
pub fn mean_value_table(
    s_values: &[u32],
    k_values: &[u32],
    n_values: &[u64],
    limits: &Limits,
) -> Result<Vec<MeanValueRow>> {
    let mut rows = Vec::new();
    for &s in s_values {
        for &k in k_values {
            for &n in n_values {
                match vinogradov_count(s, k, n, limits) {
                    Ok(c) => rows.push(MeanValueRow::from(&c)),
                    Err(e) if matches!(e, Error::Budget { .. }) => {
                        let (bound_main, bound_secondary) = conjecture_bound(s, k, n);
                        rows.push(MeanValueRow {
                            s,
                            k,
                            n,
                            count: None,
                            bound_main,
                            bound_secondary,
                            ratio: None,
                            refusal: Some(e.to_string()),
                        });
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: [&str; 7] = ["s", "k", "N", "count", "bound_main", "bound_secondary", "ratio"];

/// Rows as a table with the columns of [`CSV_HEADER`]; refused cells leave
/// count and ratio empty.
pub fn table(rows: &[MeanValueRow]) -> Table {
    let mut t = Table::new(CSV_HEADER);
    for r in rows {
        t.push([
            r.s.to_string(),
            r.k.to_string(),
            r.n.to_string(),
            r.count.as_ref().map(|c| c.to_string()).unwrap_or_default(),
            r.bound_main.to_string(),
            r.bound_secondary.to_string(),
            r.ratio.map(|x| x.to_string()).unwrap_or_default(),
        ]);
    }
    t
}
