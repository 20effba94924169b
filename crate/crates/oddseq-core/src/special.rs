//! Special functions and limit laws.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_PI, PI};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{domain, Result};

/// Default switch point between the power series and the Hankel expansion.
pub const BESSEL_SWITCH: f64 = 10.0;

/// `sqrt(6) / pi`, the scale of peaks and part counts.
pub const B: f64 = 0.779_696_801_233_676_4;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn is_half_integer(nu: f64) -> bool {
    let t = nu - 0.5;
    t == t.round()
}

/// Argument above which [`bessel_i`] uses the Hankel expansion.
///
/// For half-integer orders the expansion terminates and is exact once the
/// reflected `e^{-x}` term is kept, so the default switch applies. For other
/// orders the truncated expansion is only good to about `e^{-2x}`, so the
/// series is kept until that is below double precision.
pub fn bessel_switch_point(nu: f64) -> f64 {
    if is_half_integer(nu) {
        BESSEL_SWITCH
    } else {
        BESSEL_SWITCH.max(20.0 + nu * nu)
    }
}

/// Modified Bessel function `I_nu(x)`, or `e^{-x} I_nu(x)` when `scaled`.
pub fn bessel_i(nu: f64, x: f64, scaled: bool) -> Result<f64> {
    if !(nu >= -0.5) || !nu.is_finite() {
        return Err(domain!("bessel_i: order {nu} not supported (need nu >= -1/2)"));
    }
    if !(x >= 0.0) {
        return Err(domain!("bessel_i: argument {x} must be non-negative"));
    }
    if x == 0.0 {
        return if nu == 0.0 {
            Ok(1.0)
        } else if nu > 0.0 {
            Ok(0.0)
        } else {
            Err(domain!("bessel_i: I_nu(0) is infinite for nu < 0"))
        };
    }
    if x <= bessel_switch_point(nu) {
        Ok(bessel_i_series(nu, x, scaled))
    } else {
        Ok(bessel_i_asymptotic(nu, x, scaled))
    }
}

/// Defining power series `sum_m (x/2)^{2m+nu} / (m! Gamma(m+nu+1))`.
pub fn bessel_i_series(nu: f64, x: f64, scaled: bool) -> f64 {
    let half = 0.5 * x;
    let mut log_t0 = nu * half.ln() - libm::lgamma(nu + 1.0);
    if scaled {
        log_t0 -= x;
    }
    let r = half * half;
    let mut t = 1.0;
    let mut s = 1.0;
    let mut m = 0.0;
    loop {
        t *= r / ((m + 1.0) * (m + 1.0 + nu));
        s += t;
        m += 1.0;
        if t < 1e-17 * s && m > half {
            break;
        }
    }
    log_t0.exp() * s
}

/// Hankel expansion including the reflected `e^{-x}` branch:
/// `I_nu(x) ~ (e^x sum (-1)^k a_k x^{-k} - sin(pi nu) e^{-x} sum a_k x^{-k}) / sqrt(2 pi x)`.
pub fn bessel_i_asymptotic(nu: f64, x: f64, scaled: bool) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut t: f64 = 1.0;
    let mut alt = 1.0;
    let mut all = 1.0;
    for k in 1..400 {
        let kf = k as f64;
        let nt = t * (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf * x);
        if nt.abs() > t.abs() {
            break;
        }
        t = nt;
        alt += if k % 2 == 1 { -t } else { t };
        all += t;
        if t.abs() < 1e-17 {
            break;
        }
    }
    let pref = 1.0 / (2.0 * PI * x).sqrt();
    let refl = (PI * nu).sin() * all * (-2.0 * x).exp();
    let scaled_val = pref * (alt - refl);
    if scaled {
        scaled_val
    } else {
        scaled_val * x.exp()
    }
}

/// `e^{-shift} I_nu(c sqrt(w)) / w^{nu/2}` for `w` in `[0, 1]`.
///
/// Near `w = 0` both numerator and denominator vanish like `w^{nu/2}`; the
/// quotient is summed directly as `sum_m (c/2)^{2m+nu} w^m / (m! Gamma(m+nu+1))`.
pub fn bessel_i_over_power(nu: f64, c: f64, w: f64, shift: f64) -> f64 {
    let y = c * w.max(0.0).sqrt();
    if y < 2.0 {
        let half = 0.5 * c;
        let log_t0 = nu * half.ln() - libm::lgamma(nu + 1.0) - shift;
        let r = half * half * w;
        let mut t = 1.0;
        let mut s = 1.0;
        let mut m = 0.0;
        while t > 1e-18 * s {
            t *= r / ((m + 1.0) * (m + 1.0 + nu));
            s += t;
            m += 1.0;
        }
        log_t0.exp() * s
    } else {
        let v = bessel_i(nu, y, true).expect("order validated by caller");
        v * (y - shift - 0.5 * nu * w.ln()).exp()
    }
}

/// Euler numbers `E_0..=E_r` (`sech t = sum E_n t^n / n!`).
pub fn euler_numbers(r: usize) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); r + 1];
    e[0] = BigInt::from(1);
    let mut row: Vec<BigInt> = vec![BigInt::from(1)];
    for n in 1..=r {
        // row holds binom(n, k) after this update
        let mut next = vec![BigInt::from(1); n + 1];
        for k in 1..n {
            next[k] = &row[k - 1] + &row[k];
        }
        row = next;
        if n % 2 == 0 {
            let mut s = BigInt::zero();
            for k in (0..n).step_by(2) {
                s += &row[k] * &e[k];
            }
            e[n] = -s;
        }
    }
    e
}

pub fn euler_number(r: usize) -> BigInt {
    euler_numbers(r).pop().unwrap()
}

/// Euler polynomial from `2 e^{xt} / (e^t + 1) = sum E_n(x) t^n / n!`, via
/// `E_n(x) = sum_k binom(n, k) E_k 2^{-k} (x - 1/2)^{n-k}`.
pub fn euler_poly(r: usize, x: f64) -> f64 {
    let e = euler_numbers(r);
    let y = x - 0.5;
    let mut binom = 1.0;
    let mut s = 0.0;
    for (k, ek) in e.iter().enumerate() {
        if k > 0 {
            binom = binom * (r - k + 1) as f64 / k as f64;
        }
        if ek.is_zero() {
            continue;
        }
        s += binom * ek.to_f64().unwrap() * 0.5f64.powi(k as i32) * y.powi((r - k) as i32);
    }
    s
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `kappa(a, b) = (2 pi)^{-a} (2(a+b))! / (a! (2b)!) E_{2b}(1/2)`.
pub fn kappa(a: usize, b: usize) -> f64 {
    let e2b = euler_number(2 * b).to_f64().unwrap() * 0.25f64.powi(b as i32);
    (2.0 * PI).powi(-(a as i32)) * factorial(2 * (a + b)) / (factorial(a) * factorial(2 * b)) * e2b
}

/// Polynomials `Q_j` with `Q_0(c) = c`, `Q_{j+1} = -(1 + c^2) Q_j'(c)`, so that
/// `d^j/dw^j cot(pi w) = pi^j Q_j(cot(pi w))`.
fn cot_polys(j: usize) -> Vec<f64> {
    let mut p = vec![0.0, 1.0];
    for _ in 0..j {
        let d: Vec<f64> = (1..p.len()).map(|i| i as f64 * p[i]).collect();
        let mut r = vec![0.0; d.len() + 2];
        for (i, &x) in d.iter().enumerate() {
            r[i] -= x;
            r[i + 2] -= x;
        }
        p = r;
    }
    p
}

/// `C_j(w) = ((1 / (2 pi i)) d/dw)^j cot(pi w)`.
pub fn cot_deriv(j: usize, omega: f64) -> Result<Complex64> {
    let frac = omega - omega.round();
    if frac.abs() < 1e-12 {
        return Err(domain!("cot_deriv: pole at integer argument {omega}"));
    }
    let (s, c) = (PI * omega).sin_cos();
    let ct = c / s;
    let p = cot_polys(j);
    let mut v = 0.0;
    for &coef in p.iter().rev() {
        v = v * ct + coef;
    }
    // (1 / (2i))^j = (-i / 2)^j
    let unit = Complex64::new(0.0, -0.5).powu(j as u32);
    Ok(unit * v)
}

/// `f_v(u; z) = e^{pi v u^2 / 2z} / (2 cosh(pi u / 2z))`.
pub fn f_v_eval(u: f64, z: Complex64, v: f64) -> Result<Complex64> {
    let ch = (Complex64::from(PI * u) / (2.0 * z)).cosh();
    if ch.norm() < 1e-300 {
        return Err(domain!("f_v: cosh vanishes at u = {u}"));
    }
    Ok((Complex64::from(PI * v * u * u) / (2.0 * z)).exp() / (2.0 * ch))
}

/// `b_j(v; z) = sum_{a+b=j} v^a kappa(a, b) z^{-a-2b}`.
pub fn b_j(v: f64, z: Complex64, j: usize) -> Complex64 {
    (0..=j)
        .map(|a| {
            let b = j - a;
            z.powi(-((a + 2 * b) as i32)) * (v.powi(a as i32) * kappa(a, b))
        })
        .sum()
}

/// Taylor side of the `f_v` expansion, `(1/2) sum_{j <= J} (pi u)^{2j} / (2j)! b_j(v; z)`.
pub fn f_v_taylor(u: f64, z: Complex64, v: f64, terms: usize) -> Complex64 {
    (0..=terms)
        .map(|j| b_j(v, z, j) * ((PI * u).powi(2 * j as i32) / factorial(2 * j)))
        .sum::<Complex64>()
        * 0.5
}

/// The same sum with `(2 pi i u)^{2j}` in place of `(pi u)^{2j}`. Differs
/// from [`f_v_eval`] by the factor `(-4)^j` in every term; kept so the
/// discrepancy can be reported.
pub fn f_v_taylor_2pi_i(u: f64, z: Complex64, v: f64, terms: usize) -> Complex64 {
    (0..=terms)
        .map(|j| b_j(v, z, j) * ((-4.0f64).powi(j as i32) * (PI * u).powi(2 * j as i32) / factorial(2 * j)))
        .sum::<Complex64>()
        * 0.5
}

/// Hyperbolic secant law, CDF `(2/pi) arctan(e^{pi x / 2})`.
pub fn sech_cdf(x: f64) -> f64 {
    FRAC_2_PI * (0.5 * PI * x).exp().atan()
}

/// Density `(1/2) sech(pi x / 2)`.
pub fn sech_pdf(x: f64) -> f64 {
    0.5 / (0.5 * PI * x).cosh()
}

/// `e^{-e^{-v} / 2}`.
pub fn gumbel_half_cdf(v: f64) -> f64 {
    (-0.5 * (-v).exp()).exp()
}

/// `(1/2) e^{-v - e^{-v}/2}`.
pub fn gumbel_half_pdf(v: f64) -> f64 {
    0.5 * (-v - 0.5 * (-v).exp()).exp()
}

/// `prod (1 - e^{-(2k-1)/(B sqrt n)})` over odd `2k - 1 > B sqrt(n) (v + log(B sqrt n))`.
pub fn large_part_product(n: f64, v: f64) -> f64 {
    let s = B * n.sqrt();
    let t = s * (v + s.ln());
    let mut e = if t < 1.0 { 1.0 } else { (t.floor() as u64 | 1) as f64 };
    if e <= t {
        e += 2.0;
    }
    let mut log_p = 0.0;
    loop {
        let x = (-e / s).exp();
        if x < 1e-16 {
            break;
        }
        log_p += (-x).ln_1p();
        e += 2.0;
    }
    log_p.exp()
}

/// Limit laws used by the verification suite.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LimitLaw {
    /// Hyperbolic secant law with unit variance scale.
    SechUnit,
    /// `e^{-e^{-v}/2}`.
    GumbelHalf,
    /// Unit exponential.
    ExpUnit,
    /// `P(X <= v) = 1 - e^{-c (v+1) / B}` on the non-negative integers.
    GeometricCb { c: f64 },
}

impl LimitLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            LimitLaw::SechUnit => sech_cdf(x),
            LimitLaw::GumbelHalf => gumbel_half_cdf(x),
            LimitLaw::ExpUnit => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
            LimitLaw::GeometricCb { c } => {
                if x < 0.0 {
                    0.0
                } else {
                    -(-c * (x.floor() + 1.0) / B).exp_m1()
                }
            }
        }
    }

    /// True when the law has atoms, so KS distance is taken on both sides of
    /// each jump.
    pub fn is_discrete(&self) -> bool {
        matches!(self, LimitLaw::GeometricCb { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LimitLaw::SechUnit => "sech",
            LimitLaw::GumbelHalf => "gumbel_half",
            LimitLaw::ExpUnit => "exp_unit",
            LimitLaw::GeometricCb { .. } => "geometric",
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton on the three-term
/// recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = z;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
