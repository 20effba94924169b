//! Asymptotic formulas: Rademacher's series for `p(n)`, the `ou(n)` main
//! term, the Kloosterman-Bessel series for rank moments, and the saddle
//! point approximation to `ou_m(n)`.
//!
//! Anything carrying the exponential scale `e^{pi sqrt(2n/3)}` is kept as a
//! logarithm or as a value multiplied by `e^{-X}`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use astro_float::{BigFloat, Consts, RoundingMode, Word};
use core::f64::consts::{FRAC_1_SQRT_2, PI};
use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{resource, usage, Result};
use crate::exact::ln_biguint;
use crate::modular::{kloosterman_a_phases, kloosterman_k1};
use crate::special::{bessel_i_over_power, cot_deriv, euler_poly, gauss_legendre, kappa, B};

const RM: RoundingMode = RoundingMode::ToEven;

/// Partial Rademacher sum and its nearest integer.
#[derive(Debug, Clone, PartialEq)]
pub struct RademacherValue {
    pub k_max: u64,
    pub approx: f64,
    pub rounded: BigInt,
    /// `|series - rounded|`, as a double.
    pub residual: f64,
}

/// Default truncation `ceil(sqrt(n)) + 5`.
pub fn rademacher_default_k(n: u64) -> u64 {
    (n as f64).sqrt().ceil() as u64 + 5
}

fn bf(x: i64, p: usize) -> BigFloat {
    BigFloat::from_i64(x, p)
}

fn bf_to_f64(x: &BigFloat) -> f64 {
    // parse through the raw parts to stay independent of formatting
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((words, _, sign, e, _)) => {
            let wb = Word::BITS as i32;
            let mut v = 0.0f64;
            for w in words.iter().rev().take(2).collect::<Vec<_>>().into_iter().rev() {
                v = v * 2f64.powi(wb) + *w as f64;
            }
            let used = words.len().min(2) as i32;
            let v = v * 2f64.powi(e - wb * used);
            if sign.is_negative() {
                -v
            } else {
                v
            }
        }
    }
}

/// Nearest integer to a finite `BigFloat`.
fn bf_round(x: &BigFloat) -> Result<BigInt> {
    let (words, _, sign, e, _) = x.as_raw_parts().ok_or_else(|| resource!("non-finite multiprecision value"))?;
    let mut bytes = Vec::with_capacity(core::mem::size_of_val(words));
    for w in words {
        bytes.extend_from_slice(&w.to_le_bytes());
    }
    let m = BigUint::from_bytes_le(&bytes);
    let shift = e as i64 - (Word::BITS as i64) * words.len() as i64;
    let mag = if shift >= 0 {
        m << shift as usize
    } else {
        let s = (-shift) as usize;
        (m + (BigUint::from(1u8) << (s - 1))) >> s
    };
    let sg = if mag.is_zero() {
        Sign::NoSign
    } else if sign.is_negative() {
        Sign::Minus
    } else {
        Sign::Plus
    };
    Ok(BigInt::from_biguint(sg, mag))
}

/// `(2 pi / (24n - 1)^{3/4}) sum_{k <= K} A_k(n)/k I_{3/2}(pi sqrt(24n - 1) / 6k)`
/// in multiprecision arithmetic, rounded to the nearest integer.
pub fn rademacher_p(n: u64, k_max: Option<u64>) -> Result<RademacherValue> {
    if n == 0 {
        return Err(usage!("rademacher_p needs n >= 1"));
    }
    let k_max = k_max.unwrap_or_else(|| rademacher_default_k(n));
    if k_max == 0 {
        return Err(usage!("k_max must be positive"));
    }
    let n_i = i64::try_from(n).map_err(|_| usage!("n = {n} too large"))?;
    // enough bits for the integer part plus a comfortable fractional margin
    let mag_bits = (PI * (2.0 * n as f64 / 3.0).sqrt() / core::f64::consts::LN_2) as usize;
    let p = (mag_bits + 192).div_ceil(64) * 64;
    let mut cc = Consts::new().map_err(|_| resource!("multiprecision constants unavailable"))?;
    let pi = cc.pi(p, RM);
    let m = bf(24 * n_i - 1, p);
    let sqrt_m = m.sqrt(p, RM);
    // x_1 = pi sqrt(24n-1) / 6
    let x1 = pi.mul(&sqrt_m, p, RM).div(&bf(6, p), p, RM);
    let mut total = bf(0, p);
    for k in 1..=k_max {
        let ki = k as i64;
        let phases = kloosterman_a_phases(ki, n_i)?;
        let mut cache: BTreeMap<i64, BigFloat> = BTreeMap::new();
        let mut a = bf(0, p);
        for &(s, e) in &phases.terms {
            let c = cache.entry(e).or_insert_with(|| {
                pi.mul(&bf(e, p), p, RM).div(&bf(phases.den, p), p, RM).cos(p, RM, &mut cc)
            });
            a = if s > 0 { a.add(c, p, RM) } else { a.sub(c, p, RM) };
        }
        if a.is_zero() {
            continue;
        }
        let x = x1.div(&bf(ki, p), p, RM);
        let ch = x.cosh(p, RM, &mut cc);
        let sh = x.sinh(p, RM, &mut cc);
        let bracket = ch.sub(&sh.div(&x, p, RM), p, RM);
        let pref = bf(2, p).div(&pi.mul(&x, p, RM), p, RM).sqrt(p, RM);
        let i32_ = pref.mul(&bracket, p, RM);
        total = total.add(&a.mul(&i32_, p, RM).div(&bf(ki, p), p, RM), p, RM);
    }
    let m34 = sqrt_m.mul(&sqrt_m.sqrt(p, RM), p, RM);
    let value = bf(2, p).mul(&pi, p, RM).div(&m34, p, RM).mul(&total, p, RM);
    let rounded = bf_round(&value)?;
    let diff = value.sub(&int_to_bf(&rounded, p), p, RM);
    Ok(RademacherValue { k_max, approx: bf_to_f64(&value), rounded, residual: bf_to_f64(&diff).abs() })
}

fn int_to_bf(x: &BigInt, p: usize) -> BigFloat {
    let (sign, digits) = x.to_u64_digits();
    let base = BigFloat::from_u64(u64::MAX, p).add(&bf(1, p), p, RM);
    let mut v = bf(0, p);
    for d in digits.iter().rev() {
        v = v.mul(&base, p, RM).add(&BigFloat::from_u64(*d, p), p, RM);
    }
    if sign == Sign::Minus {
        v.neg()
    } else {
        v
    }
}

/// `ln` of `e^{pi sqrt(2n/3)} / (2^{13/4} 3^{1/4} n^{3/4})`.
pub fn ln_ou_main_term(n: f64) -> f64 {
    PI * (2.0 * n / 3.0).sqrt() - 3.25 * 2f64.ln() - 0.25 * 3f64.ln() - 0.75 * n.ln()
}

pub fn ou_main_term(n: f64) -> f64 {
    ln_ou_main_term(n).exp()
}

/// `ln` of `(6n)^l |E_{2l}(1/2)| ou_main(n)`, the leading term of the
/// `2l`-th rank moment.
pub fn ln_moment_leading(n: f64, l: usize) -> f64 {
    let e = euler_poly(2 * l, 0.5).abs();
    l as f64 * (6.0 * n).ln() + e.ln() + ln_ou_main_term(n)
}

/// `(-6n)^l E_{2l}(1/2) ou_main(n)`; positive for every `l`.
pub fn moment_leading(n: f64, l: usize) -> f64 {
    ln_moment_leading(n, l).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum QuadratureRule {
    GaussLegendre,
}

/// How the `0/0` at `x = +-1` is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EndpointMode {
    /// `I_nu(c sqrt(w)) / w^{nu/2}` is evaluated as one entire function of `w`.
    CancellationAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    pub nodes: usize,
    pub endpoint_mode: EndpointMode,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rule: QuadratureRule::GaussLegendre, nodes: 64, endpoint_mode: EndpointMode::CancellationAware }
    }
}

impl QuadratureSpec {
    pub fn with_nodes(nodes: usize) -> Result<Self> {
        if nodes < 8 {
            return Err(usage!("quadrature needs at least 8 nodes, got {nodes}"));
        }
        Ok(QuadratureSpec { nodes, ..Self::default() })
    }
}

/// Largest odd `k <= floor(sqrt(n))`.
pub fn default_moment_k(n: u64) -> u64 {
    let r = n.isqrt().max(1);
    if r.is_multiple_of(2) {
        r - 1
    } else {
        r
    }
}

/// Result of the moment series. `scaled` is the complex sum times `e^{-X}`
/// with `X = pi sqrt((4n+1)/6)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentAsymptotic {
    pub n: u64,
    pub ell: usize,
    pub k_max: u64,
    pub log_scale: f64,
    pub scaled_re: f64,
    pub scaled_im: f64,
}

/// Relative imaginary residue above which the result is flagged.
pub const IMAG_TOLERANCE: f64 = 1e-6;

/// Ratio between the prefactor with `2^{15/4}` and the one used here.
pub const PRINTED_PREFACTOR_RATIO: f64 = FRAC_1_SQRT_2;

impl MomentAsymptotic {
    pub fn ln_value(&self) -> f64 {
        self.scaled_re.ln() + self.log_scale
    }

    pub fn value(&self) -> f64 {
        self.ln_value().exp()
    }

    pub fn imag_ratio(&self) -> f64 {
        (self.scaled_im / self.scaled_re).abs()
    }

    /// True when the imaginary part is too large to be discarded silently.
    pub fn imag_warning(&self) -> bool {
        !(self.imag_ratio() < IMAG_TOLERANCE)
    }

    /// `value / exact`, computed in log space.
    pub fn ratio_to(&self, exact: &BigInt) -> Result<f64> {
        let ln_ex = crate::exact::ln_bigint(exact)?;
        Ok((self.ln_value() - ln_ex).exp())
    }
}

/// Kloosterman-Bessel series for `ou_l(n) = sum_m m^l ou(m, n)`, `l` even,
/// over odd `k <= k_max` and `0 <= v < 2k`, with prefactor
/// `pi / (2^{13/4} 3^{3/4} (4n+1)^{1/4})`.
pub fn moment_asymptotic(n: u64, ell: usize, k_max: Option<u64>, quad: &QuadratureSpec) -> Result<MomentAsymptotic> {
    if ell % 2 == 1 {
        return Err(usage!("odd moments vanish by symmetry; got l = {ell}"));
    }
    if n == 0 {
        return Err(usage!("moment_asymptotic needs n >= 1"));
    }
    if quad.nodes < 8 {
        return Err(usage!("quadrature needs at least 8 nodes, got {}", quad.nodes));
    }
    let cap = n.isqrt().max(1);
    let k_max = match k_max {
        None => default_moment_k(n),
        Some(0) => return Err(usage!("k_max must be positive")),
        Some(k) if k > cap => return Err(usage!("k_max = {k} exceeds floor(sqrt(n)) = {cap}")),
        Some(k) => k,
    };
    let n_i = i64::try_from(n).map_err(|_| usage!("n = {n} too large"))?;
    let nf = n as f64;
    let big_x = PI * ((4.0 * nf + 1.0) / 6.0).sqrt();
    let (xs, ws) = gauss_legendre(quad.nodes);
    let two_sqrt3 = 2.0 * 3f64.sqrt();

    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..=ell / 2 {
        let binom = binomial(ell, 2 * j);
        for a in 0..=j {
            let b = j - a;
            let coef = binom * (-0.25f64).powi(j as i32) * kappa(a, b) * (6.0 * (4.0 * nf + 1.0)).powf(a as f64 / 2.0 + b as f64);
            let nu = (a + 2 * b) as f64 - 0.5;
            for k in (1..=k_max).step_by(2) {
                let kf = k as f64;
                let c = big_x / kf;
                // Bessel part depends only on x
                let bess: Vec<f64> = xs.iter().map(|&x| bessel_i_over_power(nu, c, 1.0 - x * x, big_x)).collect();
                if bess.iter().all(|&v| v == 0.0) {
                    continue;
                }
                let kp = kf.powi(a as i32 - 2);
                for v in 0..2 * k as i64 {
                    let kl = kloosterman_k1(k as i64, n_i, v)?;
                    let mut integral = Complex64::new(0.0, 0.0);
                    for ((&x, &w), &bv) in xs.iter().zip(&ws).zip(&bess) {
                        let omega = (x / two_sqrt3 - v as f64 - 0.5) / (2.0 * kf);
                        integral += cot_deriv(ell - 2 * j, omega)? * (w * bv);
                    }
                    total += kl * integral * (coef * kp);
                }
            }
        }
    }
    let pref = PI / (2f64.powf(3.25) * 3f64.powf(0.75) * (4.0 * nf + 1.0).powf(0.25));
    let scaled = total * pref;
    if !(scaled.re.is_finite() && scaled.re > 0.0) {
        return Err(resource!("moment series lost precision at n = {n}, l = {ell}"));
    }
    Ok(MomentAsymptotic { n, ell, k_max, log_scale: big_x, scaled_re: scaled.re, scaled_im: scaled.im })
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// `f` of the peak-conditioned Cauchy integral at `s = B sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleFunction {
    pub n: u64,
    pub m: u64,
    pub s: f64,
}

impl SaddleFunction {
    pub fn new(n: u64, m: u64) -> Result<Self> {
        if n == 0 || 2 * m + 1 > n {
            return Err(usage!("need 1 <= 2m+1 <= n, got n = {n}, m = {m}"));
        }
        Ok(SaddleFunction { n, m, s: B * (n as f64).sqrt() })
    }

    fn odd(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.m + 1).map(|k| (2 * k - 1) as f64)
    }

    /// `(n - (2m+1))/s - 2 sum_{k <= m+1} log(1 - e^{-(2k-1)/s})`.
    pub fn f0(&self) -> f64 {
        let peak = (2 * self.m + 1) as f64;
        (self.n as f64 - peak) / self.s - 2.0 * self.odd().map(|o| (-(-o / self.s).exp()).ln_1p()).sum::<f64>()
    }

    /// `(2m+1) - n + 2 sum (2k-1)/(e^{(2k-1)/s} - 1)`.
    pub fn f1(&self) -> f64 {
        let peak = (2 * self.m + 1) as f64;
        peak - self.n as f64 + 2.0 * self.odd().map(|o| o / (o / self.s).exp_m1()).sum::<f64>()
    }

    /// `2 sum (2k-1)^2 e^{-(2k-1)/s} / (1 - e^{-(2k-1)/s})^2`.
    pub fn f2(&self) -> f64 {
        2.0 * self
            .odd()
            .map(|o| {
                let e = (-o / self.s).exp();
                o * o * e / ((-o / self.s).exp_m1()).powi(2)
            })
            .sum::<f64>()
    }

    /// `f(0) - log(2 pi f''(0)) / 2`.
    pub fn ln_saddle(&self) -> f64 {
        self.f0() - 0.5 * (2.0 * PI * self.f2()).ln()
    }
}

/// `e^{f(0)} / sqrt(2 pi f''(0))` as a logarithm.
pub fn ln_saddle_ou_m(n: u64, m: u64) -> Result<f64> {
    Ok(SaddleFunction::new(n, m)?.ln_saddle())
}

pub fn saddle_ou_m(n: u64, m: u64) -> Result<f64> {
    Ok(ln_saddle_ou_m(n, m)?.exp())
}

/// Rescaled peak position `r = (2m+1 - s log(2s)) / s`.
pub fn peak_r(n: f64, m: f64) -> f64 {
    let s = B * n.sqrt();
    (2.0 * m + 1.0 - s * (2.0 * s).ln()) / s
}

/// `(1/s) e^{-r - e^{-r}/2}`.
pub fn peak_density(n: f64, m: f64) -> f64 {
    let s = B * n.sqrt();
    let r = peak_r(n, m);
    (-r - 0.5 * (-r).exp()).exp() / s
}

/// `sum_{m >= 0} peak_density(n, m)`, stopping once the tail is negligible.
pub fn peak_lattice_sum(n: f64) -> f64 {
    let mut total = 0.0;
    let mut m = 0u64;
    loop {
        let d = peak_density(n, m as f64);
        total += d;
        if peak_r(n, m as f64) > 5.0 && d < 1e-18 {
            break;
        }
        m += 1;
    }
    total
}

/// `ln(ou_m(n) / ou(n))` from exact counts.
pub fn ln_exact_peak_share(ou_m: &BigUint, ou: &BigUint) -> f64 {
    ln_biguint(ou_m) - ln_biguint(ou)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rademacher() {
        assert_eq!(rademacher_p(5, None).unwrap().rounded, BigInt::from(7));
        assert_eq!(rademacher_p(100, None).unwrap().rounded, BigInt::from(190_569_292u64));
    }

    #[test]
    fn main_term_at_one() {
        assert!((ou_main_term(1.0) - 1.038).abs() < 1e-3);
    }

    #[test]
    fn leading_small_l() {
        let n = 50.0;
        assert!((moment_leading(n, 1) / ou_main_term(n) - 1.5 * n).abs() < 1e-9 * n);
        assert!((moment_leading(n, 2) / ou_main_term(n) - 11.25 * n * n).abs() < 1e-9 * n * n);
    }

    #[test]
    fn odd_moment_rejected() {
        assert!(moment_asymptotic(100, 1, None, &QuadratureSpec::default()).is_err());
        assert!(QuadratureSpec::with_nodes(4).is_err());
    }

    #[test]
    fn saddle_rejects_large_peak() {
        assert!(SaddleFunction::new(10, 5).is_err());
        assert!(SaddleFunction::new(10, 4).unwrap().f2() > 0.0);
    }
}
