//! Peak-conditioned Boltzmann sampler.
//!
//! Under `Q_q` a sequence of weight `N` has probability proportional to
//! `q^N`. The peak index `m` is drawn from its exact marginal
//! `w_m = q^{2m+1} prod_{k <= m+1} (1 - q^{2k-1})^{-2}`, and given `m` the
//! counts of the part `2k - 1` on each side are independent geometric
//! variables with `P(X >= x) = q^{(2k-1) x}` for `k <= m + 1`.
//! Rejecting until `N = n` gives the uniform law on sequences of weight `n`.

use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{resource, usage, Result};
use crate::exact::OddUnimodalSeq;
use crate::special::B;

/// Largest admissible truncation tail of the peak law.
pub const PEAK_TAIL: f64 = 1e-12;

/// `e^{-1/(B sqrt(n))}`; `n` may be any positive real.
pub fn q_of_n(n: f64) -> f64 {
    (-1.0 / (B * n.sqrt())).exp()
}

/// Sampler parameters for target weight `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoltzmannParams {
    pub n: u64,
    pub q: f64,
    /// `B sqrt(n)`, so that `q = e^{-1/s}`.
    pub s: f64,
    pub m_cutoff: u64,
    /// Normalized cumulative peak weights, `cdf[m] = P(peak index <= m)`.
    cdf: Vec<f64>,
    /// `ln q^{2k-1}` for `k = 1..=m_cutoff+1`.
    ln_p: Vec<f64>,
    /// `q^{2k-1}` for the same range.
    p: Vec<f64>,
}

impl BoltzmannParams {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(usage!("target weight must be positive"));
        }
        let s = B * (n as f64).sqrt();
        let q = q_of_n(n as f64);
        // log weights until the geometric tail bound drops below PEAK_TAIL
        let mut lw = Vec::new();
        let mut acc = 0.0;
        let mut best = f64::NEG_INFINITY;
        let mut m = 0u64;
        loop {
            let odd = (2 * m + 1) as f64;
            acc -= 2.0 * (-(-odd / s).exp()).ln_1p();
            let l = -odd / s + acc;
            lw.push(l);
            best = best.max(l);
            // w_{m+1}/w_m = q^2 / (1 - q^{2m+3})^2
            let odd2 = (2 * m + 3) as f64;
            let ratio = (-2.0 / s - 2.0 * (-(-odd2 / s).exp()).ln_1p()).exp();
            if l < best && ratio < 1.0 {
                let tail = (l - best).exp() / (1.0 - ratio);
                if tail < PEAK_TAIL * 1e-3 {
                    break;
                }
            }
            m += 1;
            if m > 100_000_000 {
                return Err(resource!("peak law did not converge at n = {n}"));
            }
        }
        let mut cdf: Vec<f64> = Vec::with_capacity(lw.len());
        let mut tot = 0.0;
        for l in &lw {
            tot += (l - best).exp();
            cdf.push(tot);
        }
        for c in &mut cdf {
            *c /= tot;
        }
        let m_cutoff = (lw.len() - 1) as u64;
        let ln_p: Vec<f64> = (1..=m_cutoff + 1).map(|k| -((2 * k - 1) as f64) / s).collect();
        let p = ln_p.iter().map(|l| l.exp()).collect();
        Ok(BoltzmannParams { n, q, s, m_cutoff, cdf, ln_p, p })
    }

    /// `P(peak index = m)` under `Q_q`.
    pub fn peak_probability(&self, m: u64) -> f64 {
        let m = m as usize;
        match m {
            _ if m >= self.cdf.len() => 0.0,
            0 => self.cdf[0],
            _ => self.cdf[m] - self.cdf[m - 1],
        }
    }

    /// `E(2m+1)` under the exact peak law.
    pub fn expected_peak(&self) -> f64 {
        (0..self.cdf.len()).map(|m| (2 * m + 1) as f64 * self.peak_probability(m as u64)).sum()
    }

    /// `q^{2k-1} / (1 - q^{2k-1})`, the mean of `X_{2k-1}` when `k <= m+1`.
    pub fn geometric_mean(&self, k: u64) -> f64 {
        let p = (-((2 * k - 1) as f64) / self.s).exp();
        p / (1.0 - p)
    }

    /// `q^{2k-1} / (1 - q^{2k-1})^2`.
    pub fn geometric_variance(&self, k: u64) -> f64 {
        let p = (-((2 * k - 1) as f64) / self.s).exp();
        p / ((1.0 - p) * (1.0 - p))
    }

    fn draw_peak<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1) as u64
    }

    /// Geometric count for the part `2k - 1` by inversion.
    fn draw_count<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> u64 {
        let u = 1.0 - rng.random::<f64>();
        // floor(ln u / ln p) is zero exactly when u > p
        if u > self.p[k - 1] {
            0
        } else {
            (u.ln() / self.ln_p[k - 1]).floor() as u64
        }
    }
}

/// One draw: the peak index and part counts `x_left[k-1] = X_{2k-1}^{[L]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleRecord {
    pub m: u64,
    pub x_left: Vec<u64>,
    pub x_right: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    Left,
    Right,
}

impl SampleRecord {
    pub fn counts(&self, side: Side) -> &[u64] {
        match side {
            Side::Left => &self.x_left,
            Side::Right => &self.x_right,
        }
    }

    pub fn peak(&self) -> u64 {
        2 * self.m + 1
    }

    /// `(2m+1) + sum (2k-1)(X^L + X^R)`.
    pub fn weight(&self) -> u64 {
        let side = |x: &[u64]| x.iter().enumerate().map(|(i, c)| (2 * i as u64 + 1) * c).sum::<u64>();
        self.peak() + side(&self.x_left) + side(&self.x_right)
    }

    /// Parts left of the peak minus parts right of it.
    pub fn rank(&self) -> i64 {
        self.x_left.iter().sum::<u64>() as i64 - self.x_right.iter().sum::<u64>() as i64
    }

    /// `X_{2k-1}` on one side (0 for `k > m + 1`).
    pub fn count(&self, side: Side, k: u64) -> u64 {
        self.counts(side).get(k as usize - 1).copied().unwrap_or(0)
    }

    /// The `t`-th largest part on one side, if there are at least `t` parts.
    pub fn largest_part(&self, side: Side, t: u64) -> Option<u64> {
        let mut seen = 0u64;
        for (i, &c) in self.counts(side).iter().enumerate().rev() {
            seen += c;
            if seen >= t {
                return Some(2 * i as u64 + 1);
            }
        }
        None
    }

    /// `sum_{k <= k_n} X_{2k-1}` on one side.
    pub fn small_count_sum(&self, side: Side, k_n: u64) -> u64 {
        self.counts(side).iter().take(k_n as usize).sum()
    }

    pub fn to_sequence(&self) -> OddUnimodalSeq {
        let expand = |x: &[u64]| {
            let mut v = Vec::new();
            for (i, &c) in x.iter().enumerate() {
                v.extend(core::iter::repeat_n(2 * i as u32 + 1, c as usize));
            }
            v
        };
        let left = expand(&self.x_left);
        let mut right = expand(&self.x_right);
        right.reverse();
        OddUnimodalSeq { left, peak: self.peak() as u32, right }
    }
}

/// Normalized statistics of a record, in the scalings of the limit laws.
impl BoltzmannParams {
    /// `(PK - s log(2s)) / s`.
    pub fn peak_statistic(&self, r: &SampleRecord) -> f64 {
        self.center(r.peak() as f64)
    }

    /// `rank / sqrt(3n/2)`.
    pub fn rank_statistic(&self, r: &SampleRecord) -> f64 {
        r.rank() as f64 / (1.5 * self.n as f64).sqrt()
    }

    /// `(Y_t - s log(2s)) / s`, absent when the side has fewer than `t` parts.
    pub fn largest_part_statistic(&self, r: &SampleRecord, side: Side, t: u64) -> Option<f64> {
        r.largest_part(side, t).map(|y| self.center(y as f64))
    }

    /// `(2k-1) X_{2k-1} / s`.
    pub fn small_part_statistic(&self, r: &SampleRecord, side: Side, k: u64) -> f64 {
        (2 * k - 1) as f64 * r.count(side, k) as f64 / self.s
    }

    /// `(sum_{k <= k_n} X_{2k-1} - s log(2 k_n - 1)) / s`.
    pub fn small_sum_statistic(&self, r: &SampleRecord, side: Side, k_n: u64) -> f64 {
        (r.small_count_sum(side, k_n) as f64 - self.s * ((2 * k_n - 1) as f64).ln()) / self.s
    }

    fn center(&self, x: f64) -> f64 {
        (x - self.s * (2.0 * self.s).ln()) / self.s
    }
}

/// Draws from `Q_q` into `out`, reusing its buffers.
pub fn sample_free_into<R: Rng + ?Sized>(params: &BoltzmannParams, rng: &mut R, out: &mut SampleRecord) {
    let m = params.draw_peak(rng);
    out.m = m;
    let len = m as usize + 1;
    out.x_left.clear();
    out.x_right.clear();
    for k in 1..=len {
        out.x_left.push(params.draw_count(k, rng));
    }
    for k in 1..=len {
        out.x_right.push(params.draw_count(k, rng));
    }
}

pub fn sample_free<R: Rng + ?Sized>(params: &BoltzmannParams, rng: &mut R) -> SampleRecord {
    let mut r = SampleRecord::default();
    sample_free_into(params, rng, &mut r);
    r
}

/// One exact-size draw and the number of free draws it took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSample {
    pub record: SampleRecord,
    pub attempts: u64,
}

/// Rejection sampling until `N = n`. Each attempt is abandoned as soon as
/// the partial weight exceeds `n`, which does not change the accepted law.
pub fn sample_exact<R: Rng + ?Sized>(params: &BoltzmannParams, rng: &mut R, max_attempts: u64) -> Result<ExactSample> {
    let n = params.n;
    let mut rec = SampleRecord::default();
    for attempt in 1..=max_attempts {
        let m = params.draw_peak(rng);
        let mut w = 2 * m + 1;
        if w > n {
            continue;
        }
        rec.m = m;
        rec.x_left.clear();
        rec.x_right.clear();
        let len = m as usize + 1;
        let mut over = false;
        for side in 0..2 {
            for k in 1..=len {
                let c = params.draw_count(k, rng);
                w = w.saturating_add(c.saturating_mul(2 * k as u64 - 1));
                if side == 0 {
                    rec.x_left.push(c);
                } else {
                    rec.x_right.push(c);
                }
                if w > n {
                    over = true;
                    break;
                }
            }
            if over {
                break;
            }
        }
        if !over && w == n {
            return Ok(ExactSample { record: rec, attempts: attempt });
        }
    }
    Err(resource!("no sample of weight {n} after {max_attempts} attempts"))
}

/// `2^{-5/4} 3^{-1/4} n^{-3/4}`, the asymptotic acceptance probability.
pub fn acceptance_rate_asymptotic(n: f64) -> f64 {
    2f64.powf(-1.25) * 3f64.powf(-0.25) * n.powf(-0.75)
}

/// ChaCha8 generator for worker `stream` under a master seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Draw counts and running sums of a scalar statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn variance(&self) -> f64 {
        let n = self.count as f64;
        (self.sum_sq - self.sum * self.sum / n) / (n - 1.0)
    }

    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Frequencies of exact-size draws over a fixed list of sequences.
pub fn exact_frequencies<R: Rng + ?Sized>(
    params: &BoltzmannParams,
    rng: &mut R,
    support: &[OddUnimodalSeq],
    accepted: u64,
    max_attempts: u64,
) -> Result<(Vec<u64>, u64)> {
    let mut freq = vec![0u64; support.len()];
    let mut attempts = 0;
    for _ in 0..accepted {
        let s = sample_exact(params, rng, max_attempts)?;
        attempts += s.attempts;
        let seq = s.record.to_sequence();
        let i = support
            .iter()
            .position(|t| *t == seq)
            .ok_or_else(|| crate::Error::Structural(alloc::format!("sampled sequence {seq:?} not in support")))?;
        freq[i] += 1;
    }
    Ok((freq, attempts))
}
