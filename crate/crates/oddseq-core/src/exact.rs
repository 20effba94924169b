//! Exact counts of odd unimodal sequences and ordinary partitions.
//!
//! An odd unimodal sequence is stored peak-marked: a weakly increasing left
//! run, a distinguished peak and a weakly decreasing right run, all parts odd
//! and none exceeding the peak. Ties with the peak are distinct objects per
//! marking, so `(1, [1])` and `([1], 1)` both count and `ou(2) = 2`.
//!
//! Everything here is built on the peak decomposition
//! `OU(zeta; q) = sum_m q^{2m+1} / ((zeta q; q^2)_{m+1} (zeta^{-1} q; q^2)_{m+1})`,
//! accumulated one peak at a time.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::AddAssign;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{resource, usage, Result};
use crate::qseries::{MomentSeries, TruncatedSeries};

/// Largest weight accepted by [`brute_force_enumerate`].
pub const BRUTE_FORCE_MAX: usize = 40;
/// Largest weight accepted by [`rank_crank_tables`].
pub const RANK_CRANK_MAX: usize = 80;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OddUnimodalSeq {
    /// Weakly increasing.
    pub left: Vec<u32>,
    pub peak: u32,
    /// Weakly decreasing.
    pub right: Vec<u32>,
}

impl OddUnimodalSeq {
    pub fn weight(&self) -> u64 {
        self.peak as u64 + self.left.iter().chain(&self.right).map(|&p| p as u64).sum::<u64>()
    }

    pub fn rank(&self) -> i64 {
        self.left.len() as i64 - self.right.len() as i64
    }

    pub fn is_valid(&self) -> bool {
        let odd = |p: &u32| p % 2 == 1;
        odd(&self.peak)
            && self.left.iter().all(odd)
            && self.right.iter().all(odd)
            && self.left.windows(2).all(|w| w[0] <= w[1])
            && self.right.windows(2).all(|w| w[0] >= w[1])
            && self.left.iter().chain(&self.right).all(|&p| p <= self.peak)
    }
}

/// `ou(m, n)` for fixed `n`, keyed by rank `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankDistribution {
    pub n: usize,
    pub counts: BTreeMap<i64, BigUint>,
}

impl RankDistribution {
    pub fn get(&self, m: i64) -> BigUint {
        self.counts.get(&m).cloned().unwrap_or_default()
    }

    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }

    /// `sum_m m^j ou(m, n)`.
    pub fn moment(&self, j: u32) -> BigInt {
        self.counts
            .iter()
            .map(|(&m, c)| BigInt::from(m).pow(j) * BigInt::from(c.clone()))
            .sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.counts.iter().all(|(&m, c)| &self.get(-m) == c)
    }
}

/// `ou(0..=n_max)`.
pub fn ou_counts(n_max: usize) -> Vec<BigUint> {
    let mut total = vec![BigUint::zero(); n_max + 1];
    for_each_peak_term(n_max, |_, p| {
        for (t, c) in total.iter_mut().zip(p) {
            *t += c;
        }
    });
    total
}

/// Coefficient of `q^n` in `q^{2m+1} / (q; q^2)_{m+1}^2`.
pub fn ou_by_peak(n: usize, m: usize) -> BigUint {
    let peak = 2 * m + 1;
    if peak > n {
        return BigUint::zero();
    }
    let s = crate::qseries::inv_factor(1, 2, Some(m + 1), 2, n - peak).expect("valid parameters");
    s.coeff(n - peak).to_biguint().expect("non-negative")
}

/// `ou_m(n)` for every `m` with `2m + 1 <= n`, in one pass.
pub fn ou_peak_row(n: usize) -> Vec<BigUint> {
    let mut row = Vec::new();
    for_each_peak_term(n, |_, p| row.push(p[n].clone()));
    row
}

/// Calls `f(m, P_m)` for `P_m = q^{2m+1} / (q; q^2)_{m+1}^2` truncated at `n_max`.
fn for_each_peak_term(n_max: usize, mut f: impl FnMut(usize, &[BigUint])) {
    let mut p = vec![BigUint::zero(); n_max + 1];
    if n_max == 0 {
        return;
    }
    p[1] = BigUint::from(1u32);
    div_one_minus(&mut p, 1);
    div_one_minus(&mut p, 1);
    let mut m = 0;
    loop {
        f(m, &p);
        let e = 2 * m + 3;
        if e > n_max {
            break;
        }
        p.rotate_right(2);
        p[0].set_zero();
        p[1].set_zero();
        div_one_minus(&mut p, e);
        div_one_minus(&mut p, e);
        m += 1;
    }
}

fn div_one_minus<T: for<'a> AddAssign<&'a T>>(a: &mut [T], e: usize) {
    for i in e..a.len() {
        let (lo, hi) = a.split_at_mut(i);
        hi[0] += &lo[i - e];
    }
}

/// Exact `ou(m, n)` over all ranks `m`.
///
/// Each peak term is kept as a table over (weight, rank) with `|rank| <= weight`.
/// Counts are accumulated in `u128` whenever `ou(n)` fits, which it does up to
/// `n` of roughly 1900; beyond that the same code runs on `BigUint`.
pub fn rank_distribution(n: usize) -> RankDistribution {
    if n == 0 {
        return RankDistribution { n, counts: BTreeMap::new() };
    }
    let bound = ou_counts(n).pop().unwrap();
    let counts = if bound.bits() < 127 {
        rank_row::<u128>(n)
            .into_iter()
            .map(|(m, c)| (m, BigUint::from(c)))
            .collect()
    } else {
        rank_row::<BigUint>(n).into_iter().collect()
    };
    RankDistribution { n, counts }
}

fn rank_row<T>(n: usize) -> Vec<(i64, T)>
where
    T: Clone + Zero + One + for<'a> AddAssign<&'a T>,
{
    let w = 2 * n + 1;
    let at = |wt: usize, r: i64| wt * w + (r + n as i64) as usize;
    let mut p = vec![T::zero(); (n + 1) * w];
    let mut acc = vec![T::zero(); w];
    p[at(1, 0)] = T::one();
    let div = |p: &mut Vec<T>, e: usize, s: i64| {
        for wt in e..=n {
            let src = wt - e;
            let r_lo = -(src as i64);
            for r in r_lo..=src as i64 {
                let from = at(src, r);
                let to = at(wt, r + s);
                // `to` lies in a later row than `from`
                let (lo, hi) = p.split_at_mut(to);
                if !lo[from].is_zero() {
                    hi[0] += &lo[from];
                }
            }
        }
    };
    div(&mut p, 1, 1);
    div(&mut p, 1, -1);
    let mut m = 0;
    loop {
        for (a, c) in acc.iter_mut().zip(&p[n * w..]) {
            *a += c;
        }
        let e = 2 * m + 3;
        if e > n {
            break;
        }
        p.rotate_right(2 * w);
        for c in &mut p[..2 * w] {
            c.set_zero();
        }
        div(&mut p, e, 1);
        div(&mut p, e, -1);
        m += 1;
    }
    acc.into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i as i64 - n as i64, c))
        .collect()
}

/// Exact rank moments `ou_l(n)` for `0 <= l <= max_moment`, `0 <= n <= n_max`,
/// indexed `[l][n]`. Odd rows vanish by symmetry and are returned anyway.
pub fn rank_moments(n_max: usize, max_moment: usize) -> Vec<Vec<BigInt>> {
    let mut acc = MomentSeries::zero(n_max, max_moment);
    if n_max >= 1 {
        let mut p = MomentSeries::one(n_max, max_moment).shift(1).div_factor(1, 1).div_factor(1, -1);
        let mut m = 0;
        loop {
            acc.add_assign(&p);
            let e = 2 * m + 3;
            if e > n_max {
                break;
            }
            p = p.shift(2).div_factor(e, 1).div_factor(e, -1);
            m += 1;
        }
    }
    (0..=max_moment)
        .map(|j| (0..=n_max).map(|n| acc.mu(j, n).clone()).collect())
        .collect()
}

/// Every peak-marked odd unimodal sequence of weight `n`.
pub fn brute_force_enumerate(n: usize) -> Result<Vec<OddUnimodalSeq>> {
    if n > BRUTE_FORCE_MAX {
        return Err(resource!("brute force enumeration limited to n <= {BRUTE_FORCE_MAX}, got {n}"));
    }
    let mut out = Vec::new();
    let mut peak = 1;
    while peak <= n {
        let rest = n - peak;
        for a in 0..=rest {
            let lefts = odd_partitions(a, peak);
            let rights = odd_partitions(rest - a, peak);
            for l in &lefts {
                for r in &rights {
                    let mut left = l.clone();
                    left.reverse();
                    out.push(OddUnimodalSeq { left, peak: peak as u32, right: r.clone() });
                }
            }
        }
        peak += 2;
    }
    Ok(out)
}

/// Partitions of `n` into odd parts `<= max`, each weakly decreasing.
fn odd_partitions(n: usize, max: usize) -> Vec<Vec<u32>> {
    fn go(n: usize, max: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        let mut p = if max % 2 == 1 { max } else { max.saturating_sub(1) };
        p = p.min(if n % 2 == 1 { n } else { n - 1 });
        while p >= 1 {
            cur.push(p as u32);
            go(n - p, p, cur, out);
            cur.pop();
            if p < 2 {
                break;
            }
            p -= 2;
        }
    }
    let mut out = Vec::new();
    go(n, max, &mut Vec::new(), &mut out);
    out
}

/// `p(0..=n_max)` from the Euler product.
pub fn partition_count(n_max: usize) -> Vec<BigUint> {
    let mut p = vec![BigUint::zero(); n_max + 1];
    p[0] = BigUint::from(1u8);
    for part in 1..=n_max {
        div_one_minus(&mut p, part);
    }
    p
}

/// All partitions of `n` as weakly decreasing part lists.
pub fn partitions(n: usize) -> Vec<Vec<u32>> {
    fn go(n: usize, max: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=max.min(n)).rev() {
            cur.push(p as u32);
            go(n - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Largest part minus number of parts.
pub fn dyson_rank(parts: &[u32]) -> i64 {
    parts.iter().copied().max().unwrap_or(0) as i64 - parts.len() as i64
}

/// Largest part if there are no ones, otherwise the number of parts larger
/// than the number of ones minus the number of ones.
pub fn crank(parts: &[u32]) -> i64 {
    let ones = parts.iter().filter(|&&p| p == 1).count() as i64;
    if ones == 0 {
        parts.iter().copied().max().unwrap_or(0) as i64
    } else {
        parts.iter().filter(|&&p| p as i64 > ones).count() as i64 - ones
    }
}

/// Rank and crank counts `N(m, n)` and `M(m, n)` for one `n`, read off their
/// generating functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankCrankTables {
    pub n: usize,
    pub rank: BTreeMap<i64, i64>,
    pub crank: BTreeMap<i64, i64>,
}

/// `N(m, n)` from `sum_k q^{k^2} / ((zeta q; q)_k (zeta^{-1} q; q)_k)` and
/// `M(m, n)` from `(q; q)_inf / ((zeta q; q)_inf (zeta^{-1} q; q)_inf)`.
/// At `n = 1` the crank series gives `M(0, 1) = -1`, `M(+-1, 1) = 1`.
pub fn rank_crank_tables(n: usize) -> Result<RankCrankTables> {
    if n > RANK_CRANK_MAX {
        return Err(resource!("rank/crank tables limited to n <= {RANK_CRANK_MAX}, got {n}"));
    }
    let w = 2 * n + 1;
    let at = |wt: usize, r: i64| wt * w + (r + n as i64) as usize;
    let div = |t: &mut Vec<i64>, e: usize, s: i64| {
        for wt in e..=n {
            for r in -(n as i64)..=n as i64 {
                let r2 = r + s;
                if r2.abs() > n as i64 {
                    continue;
                }
                let v = t[at(wt - e, r)];
                t[at(wt, r2)] += v;
            }
        }
    };
    let mut rank = vec![0i64; (n + 1) * w];
    let mut k = 0usize;
    while k * k <= n {
        let mut t = vec![0i64; (n + 1) * w];
        t[at(k * k, 0)] = 1;
        for i in 1..=k {
            div(&mut t, i, 1);
            div(&mut t, i, -1);
        }
        for (a, b) in rank.iter_mut().zip(&t) {
            *a += b;
        }
        k += 1;
    }
    let mut cr = vec![0i64; (n + 1) * w];
    cr[at(0, 0)] = 1;
    for i in 1..=n {
        div(&mut cr, i, 1);
        div(&mut cr, i, -1);
    }
    for i in 1..=n {
        for wt in (i..=n).rev() {
            for r in -(n as i64)..=n as i64 {
                let v = cr[at(wt - i, r)];
                cr[at(wt, r)] -= v;
            }
        }
    }
    let row = |t: &[i64]| -> BTreeMap<i64, i64> {
        (-(n as i64)..=n as i64)
            .filter_map(|r| {
                let v = t[at(n, r)];
                (v != 0).then_some((r, v))
            })
            .collect()
    };
    Ok(RankCrankTables { n, rank: row(&rank), crank: row(&cr) })
}

/// Natural log of a positive big integer, accurate to double precision.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return libm::log(x.to_f64().unwrap());
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    libm::log(top) + shift as f64 * core::f64::consts::LN_2
}

/// Natural log of a positive big integer.
pub fn ln_bigint(x: &BigInt) -> Result<f64> {
    match x.to_biguint() {
        Some(u) if !u.is_zero() => Ok(ln_biguint(&u)),
        _ => Err(usage!("logarithm of non-positive integer")),
    }
}

/// `ou` counts as a plain series (useful for cross-module checks).
pub fn ou_series(n_max: usize) -> TruncatedSeries {
    TruncatedSeries::from_coeffs(n_max, ou_counts(n_max).into_iter().map(BigInt::from))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_and_narrow_accumulators_agree() {
        for n in [1, 7, 40, 90] {
            let a: Vec<(i64, BigUint)> = rank_row::<u128>(n).into_iter().map(|(m, c)| (m, BigUint::from(c))).collect();
            assert_eq!(a, rank_row::<BigUint>(n));
        }
    }
}
