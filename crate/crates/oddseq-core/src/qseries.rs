//! Truncated power series in `q` with exact integer coefficients.
//!
//! [`MomentSeries`] tracks, for every power of `q`, the power sums
//! `mu_j(n) = sum_m m^j c(m, n)` of a second grading `m` (the rank) instead
//! of expanding in the rank variable. Multiplying two such series combines
//! the power sums binomially, and dividing by `1 - zeta^s q^e` becomes a
//! linear recurrence on the moment vectors.

use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{usage, Result};

/// Power series `sum_{n <= N} c(n) q^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<BigInt>,
}

impl TruncatedSeries {
    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![BigInt::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = BigInt::one();
        s
    }

    /// Builds a series from coefficients; missing entries are zero and
    /// entries past `order` are dropped.
    pub fn from_coeffs<T: Into<BigInt>>(order: usize, coeffs: impl IntoIterator<Item = T>) -> Self {
        let mut s = Self::zero(order);
        for (slot, c) in s.coeffs.iter_mut().zip(coeffs) {
            *slot = c.into();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &BigInt {
        &self.coeffs[n]
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    /// Multiplies by `(1 - q^e)^{-1}` in place of a fresh copy.
    pub fn div_one_minus(mut self, e: usize) -> Self {
        assert!(e >= 1);
        for i in e..self.coeffs.len() {
            let (lo, hi) = self.coeffs.split_at_mut(i);
            hi[0] += &lo[i - e];
        }
        self
    }

    /// Multiplies by `q^e`, truncating at the same order.
    pub fn shift(mut self, e: usize) -> Self {
        let n = self.coeffs.len();
        if e >= n {
            return Self::zero(n - 1);
        }
        self.coeffs.rotate_right(e);
        for c in &mut self.coeffs[..e] {
            c.set_zero();
        }
        self
    }
}

/// Cauchy product truncated at the common order.
pub fn series_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
    if a.order() != b.order() {
        return Err(usage!("series orders differ: {} vs {}", a.order(), b.order()));
    }
    let n = a.order();
    let mut out = TruncatedSeries::zero(n);
    for (i, ai) in a.coeffs.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.coeffs[..=n - i].iter().enumerate() {
            if !bj.is_zero() {
                out.coeffs[i + j] += ai * bj;
            }
        }
    }
    Ok(out)
}

/// `prod_{k < t} (1 - q^{c + k d})^{-p}` truncated at order `n`.
/// `count = None` takes every factor with `c + k d <= n`.
pub fn inv_factor(
    start: usize,
    step: usize,
    count: Option<usize>,
    power: usize,
    n: usize,
) -> Result<TruncatedSeries> {
    if start == 0 || step == 0 || power == 0 {
        return Err(usage!("inv_factor needs start, step, power >= 1"));
    }
    if count == Some(0) {
        return Err(usage!("inv_factor needs count >= 1"));
    }
    let mut s = TruncatedSeries::one(n);
    let mut k = 0usize;
    loop {
        if count.is_some_and(|t| k >= t) {
            break;
        }
        let e = start + k * step;
        if e > n {
            break;
        }
        for _ in 0..power {
            s = s.div_one_minus(e);
        }
        k += 1;
    }
    Ok(s)
}

/// Rank power sums `mu_j(n)` for `0 <= n <= N`, `0 <= j <= L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentSeries {
    order: usize,
    max_moment: usize,
    // row-major in n, each row holds mu_0..mu_L
    data: Vec<BigInt>,
}

impl MomentSeries {
    pub fn zero(order: usize, max_moment: usize) -> Self {
        Self { order, max_moment, data: vec![BigInt::zero(); (order + 1) * (max_moment + 1)] }
    }

    /// The constant series 1 (a single object of weight 0 and rank 0).
    pub fn one(order: usize, max_moment: usize) -> Self {
        let mut s = Self::zero(order, max_moment);
        s.data[0] = BigInt::one();
        s
    }

    /// `1 / (1 - zeta^sign q^e)`: one object of weight `i e` and rank
    /// `sign * i` for every `i >= 0`.
    pub fn geometric(e: usize, sign: i64, order: usize, max_moment: usize) -> Self {
        Self::one(order, max_moment).div_factor(e, sign)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn max_moment(&self) -> usize {
        self.max_moment
    }

    pub fn mu(&self, j: usize, n: usize) -> &BigInt {
        &self.data[n * (self.max_moment + 1) + j]
    }

    /// The `j = 0` layer as a plain series (total counts).
    pub fn counts(&self) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(self.order, (0..=self.order).map(|n| self.mu(0, n).clone()))
    }

    /// Multiplies by `q^e` (no rank change).
    pub fn shift(mut self, e: usize) -> Self {
        let w = self.max_moment + 1;
        let len = self.data.len();
        let off = e * w;
        if off >= len {
            return Self::zero(self.order, self.max_moment);
        }
        self.data.rotate_right(off);
        for c in &mut self.data[..off] {
            c.set_zero();
        }
        self
    }

    /// Multiplies by `(1 - zeta^sign q^e)^{-1}`.
    ///
    /// With `S = T / (1 - zeta^s q^e)` we have `S = T + zeta^s q^e S`, and
    /// shifting every rank by `s` maps power sums through
    /// `mu'_j = sum_i binom(j, i) s^{j - i} mu_i`.
    pub fn div_factor(mut self, e: usize, sign: i64) -> Self {
        assert!(e >= 1);
        assert!(sign == 1 || sign == -1);
        let w = self.max_moment + 1;
        let mat = shift_matrix(self.max_moment, sign);
        let mut tmp = BigInt::zero();
        for n in e..=self.order {
            let (lo, hi) = self.data.split_at_mut(n * w);
            let prev = &lo[(n - e) * w..(n - e + 1) * w];
            let cur = &mut hi[..w];
            for j in 0..w {
                for (i, p) in prev[..=j].iter().enumerate() {
                    let c = mat[j * w + i];
                    if p.is_zero() {
                        continue;
                    }
                    match c {
                        1 => cur[j] += p,
                        -1 => cur[j] -= p,
                        _ => {
                            tmp.clone_from(p);
                            tmp *= c;
                            cur[j] += &tmp;
                        }
                    }
                }
            }
        }
        self
    }

    /// Adds another series of the same shape.
    pub fn add_assign(&mut self, other: &MomentSeries) {
        assert_eq!(self.order, other.order);
        assert_eq!(self.max_moment, other.max_moment);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// `binom(j, i) * sign^(j - i)` laid out row-major.
fn shift_matrix(l: usize, sign: i64) -> Vec<i64> {
    let w = l + 1;
    let mut m = vec![0i64; w * w];
    for j in 0..w {
        let mut b = 1i64;
        for i in 0..=j {
            if i > 0 {
                b = b * (j - i + 1) as i64 / i as i64;
            }
            let s = if (j - i) % 2 == 1 { sign } else { 1 };
            m[j * w + i] = b * s;
        }
    }
    m
}

/// `mu_j(a*b at n) = sum_{n1+n2=n} sum_i binom(j,i) mu_i^a(n1) mu_{j-i}^b(n2)`.
pub fn moment_mul(a: &MomentSeries, b: &MomentSeries) -> Result<MomentSeries> {
    if a.order != b.order || a.max_moment != b.max_moment {
        return Err(usage!(
            "moment series shapes differ: ({}, {}) vs ({}, {})",
            a.order,
            a.max_moment,
            b.order,
            b.max_moment
        ));
    }
    let n = a.order;
    let l = a.max_moment;
    let w = l + 1;
    let binom = shift_matrix(l, 1);
    let mut out = MomentSeries::zero(n, l);
    for n1 in 0..=n {
        if a.mu(0, n1).is_zero() && (0..w).all(|j| a.mu(j, n1).is_zero()) {
            continue;
        }
        for n2 in 0..=n - n1 {
            for j in 0..w {
                let mut acc = BigInt::zero();
                for i in 0..=j {
                    let x = a.mu(i, n1);
                    let y = b.mu(j - i, n2);
                    if x.is_zero() || y.is_zero() {
                        continue;
                    }
                    acc += x * y * binom[j * w + i];
                }
                out.data[(n1 + n2) * w + j] += acc;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(s: &TruncatedSeries) -> Vec<i64> {
        s.coeffs().iter().map(|c| i64::try_from(c).unwrap()).collect()
    }

    #[test]
    fn difference_of_squares() {
        let a = TruncatedSeries::from_coeffs(2, [1, 1]);
        let b = TruncatedSeries::from_coeffs(2, [1, -1]);
        assert_eq!(ints(&series_mul(&a, &b).unwrap()), [1, 0, -1]);
    }

    #[test]
    fn geometric_times_one_minus_q() {
        let g = TruncatedSeries::one(10).div_one_minus(1);
        let f = TruncatedSeries::from_coeffs(10, [1, -1]);
        assert_eq!(series_mul(&g, &f).unwrap(), TruncatedSeries::one(10));
    }

    #[test]
    fn order_mismatch_is_usage_error() {
        let a = TruncatedSeries::one(3);
        let b = TruncatedSeries::one(4);
        assert!(matches!(series_mul(&a, &b), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn inv_factor_examples() {
        assert_eq!(ints(&inv_factor(1, 1, None, 1, 5).unwrap()), [1, 1, 2, 3, 5, 7]);
        assert_eq!(ints(&inv_factor(1, 2, Some(1), 2, 4).unwrap()), [1, 2, 3, 4, 5]);
        assert_eq!(ints(&inv_factor(1, 2, Some(2), 2, 4).unwrap()), [1, 2, 3, 6, 9]);
    }

    #[test]
    fn moment_mul_pair() {
        let a = MomentSeries::geometric(1, 1, 2, 2);
        let b = MomentSeries::geometric(1, -1, 2, 2);
        let p = moment_mul(&a, &b).unwrap();
        let mu = |j, n| i64::try_from(p.mu(j, n)).unwrap();
        assert_eq!([mu(0, 0), mu(0, 1), mu(0, 2)], [1, 2, 3]);
        assert_eq!([mu(1, 0), mu(1, 1), mu(1, 2)], [0, 0, 0]);
        assert_eq!(mu(2, 1), 2);
        assert_eq!(mu(2, 2), 8);
    }

    #[test]
    fn div_factor_matches_moment_mul() {
        let base = MomentSeries::geometric(2, 1, 12, 4).shift(1);
        let via_mul = moment_mul(&base, &MomentSeries::geometric(3, -1, 12, 4)).unwrap();
        assert_eq!(base.div_factor(3, -1), via_mul);
    }
}
