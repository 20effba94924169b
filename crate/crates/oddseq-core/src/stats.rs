//! Empirical distributions, distances, and the limit-law battery.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use num_traits::ToPrimitive;

use crate::boltzmann::{sample_free_into, stream_rng, BoltzmannParams, Moments, SampleRecord, Side};
use crate::error::{usage, Result};
use crate::exact::rank_distribution;
use crate::special::{gauss_legendre, gumbel_half_cdf, large_part_product, LimitLaw, B, EULER_GAMMA};

fn check_sorted(sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(usage!("empty sample"));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(usage!("sample contains NaN"));
    }
    if sample.windows(2).any(|w| w[0] > w[1]) {
        return Err(usage!("sample is not sorted"));
    }
    Ok(())
}

/// Sorts a sample in place (NaN last) and returns it.
pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Exact sup distance between the empirical CDF of a sorted sample and a
/// continuous CDF. Ties are handled because the running maxima at the first
/// and last copy of a value bound both one-sided limits.
pub fn ks_distance_cdf(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    check_sorted(sample)?;
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Sup distance between two right-continuous step functions whose jumps
/// all lie in `points` (sorted).
fn step_sup(points: &[f64], a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> f64 {
    points.iter().map(|&x| (a(x) - b(x)).abs()).fold(0.0, f64::max)
}

/// Empirical CDF of a sorted sample.
pub fn ecdf(sample: &[f64], x: f64) -> f64 {
    sample.partition_point(|&s| s <= x) as f64 / sample.len() as f64
}

/// KS distance against a limit law. Discrete laws are compared as step
/// functions over the union of sample values and integer atoms.
pub fn ks_distance(sample: &[f64], law: &LimitLaw) -> Result<f64> {
    if !law.is_discrete() {
        return ks_distance_cdf(sample, |x| law.cdf(x));
    }
    check_sorted(sample)?;
    let lo = sample[0].min(0.0).floor() as i64;
    let hi = sample[sample.len() - 1].ceil() as i64;
    let mut pts: Vec<f64> = (lo..=hi).map(|v| v as f64).collect();
    pts.extend_from_slice(sample);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    Ok(step_sup(&pts, |x| ecdf(sample, x), |x| law.cdf(x)).clamp(0.0, 1.0))
}

/// KS distance of a weighted discrete distribution (atoms sorted by position,
/// weights summing to one) from a continuous CDF.
pub fn ks_distance_weighted(atoms: &[(f64, f64)], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if atoms.is_empty() {
        return Err(usage!("empty distribution"));
    }
    if atoms.windows(2).any(|w| w[0].0 > w[1].0) {
        return Err(usage!("atoms are not sorted"));
    }
    let mut below = 0.0;
    let mut d: f64 = 0.0;
    for &(x, w) in atoms {
        let f = cdf(x);
        d = d.max((f - below).abs());
        below += w;
        d = d.max((below - f).abs());
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Half the L1 distance between two distributions on a common enumeration.
pub fn tv_distance_discrete(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(usage!("support sizes differ: {} vs {}", p.len(), q.len()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Pearson statistic `sum (O - E)^2 / E`.
pub fn chi_square_statistic(observed: &[u64], probs: &[f64]) -> Result<f64> {
    if observed.len() != probs.len() {
        return Err(usage!("observed and expected lengths differ"));
    }
    let total: u64 = observed.iter().sum();
    Ok(observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum())
}

/// Empirical quantile (lower, by rank) of a sorted sample.
pub fn quantile(sample: &[f64], p: f64) -> f64 {
    let i = ((p * sample.len() as f64).ceil() as usize).clamp(1, sample.len()) - 1;
    sample[i]
}

/// One KS comparison.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EcdfReport {
    pub sample_size: u64,
    pub statistic: String,
    pub ks_distance: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl EcdfReport {
    pub fn new(statistic: &str, sample: &[f64], law: &LimitLaw, threshold: f64) -> Result<Self> {
        let d = ks_distance(sample, law)?;
        Ok(EcdfReport {
            sample_size: sample.len() as u64,
            statistic: statistic.to_string(),
            ks_distance: d,
            threshold,
            pass: d < threshold,
        })
    }
}

/// `P(Y <= w)` for the rescaled largest part on one side:
/// `2 e^{-x/4} - e^{-x/2}` with `x = e^{-w}`.
pub fn largest_part_marginal_cdf(w: f64) -> f64 {
    let x = (-w).exp();
    2.0 * (-0.25 * x).exp() - (-0.5 * x).exp()
}

/// Joint CDF of (peak, largest left part, largest right part), all rescaled,
/// from the limiting density with one ordered part per side:
/// `int_{r <= v0} (1/2) e^{-r - e^{-r}/2} G(min(vl, r) | r) G(min(vr, r) | r) dr`
/// with `G(w | r) = exp(-(e^{-w} - e^{-r})/4)`.
pub fn peak_largest_joint_cdf(v0: f64, vl: f64, vr: f64) -> f64 {
    // substitute t = e^{-e^{-r}/2}, so the outer measure becomes dt on (0, F(v0)]
    let g = |w: f64, r: f64| (-0.25 * ((-w).exp() - (-r).exp())).exp();
    let integrand = |t: f64| {
        let r = -(-2.0 * t.ln()).ln();
        g(vl.min(r), r) * g(vr.min(r), r)
    };
    let top = gumbel_half_cdf(v0);
    let mut cuts = vec![0.0, top];
    for v in [vl, vr] {
        let c = gumbel_half_cdf(v);
        if c > 0.0 && c < top {
            cuts.push(c);
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    let (xs, ws) = gauss_legendre(64);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        total += h * xs.iter().zip(&ws).map(|(&x, &wt)| wt * integrand(mid + h * x)).sum::<f64>();
    }
    total
}

/// Thresholds and sizes for the limit battery.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LimitSuiteConfig {
    /// Weights for the exact rank-law trend.
    pub rank_ns: Vec<usize>,
    /// Weight for the sampled limit laws.
    pub sample_n: u64,
    /// Weight for the mean-peak check.
    pub mean_n: u64,
    pub draws: u64,
    pub seed: u64,
    /// `k` values for the exponential marginals of `(2k-1) X_{2k-1} / s`.
    pub exp_ks: Vec<u64>,
    /// Odd part `2k - 1` of order `sqrt(n)` for the geometric marginal.
    pub geometric_part: u64,
    /// Truncation of the small-part sums; `None` means `floor(n^{1/4})`.
    pub k_n: Option<u64>,
    pub ks_threshold: f64,
    pub joint_threshold: f64,
    pub factor_threshold: f64,
    pub mean_sigmas: f64,
    pub product_threshold: f64,
}

impl Default for LimitSuiteConfig {
    fn default() -> Self {
        LimitSuiteConfig {
            rank_ns: vec![64, 128, 256, 512],
            sample_n: 1_000_000,
            mean_n: 10_000,
            draws: 100_000,
            seed: 0,
            exp_ks: vec![1, 2, 3],
            geometric_part: 999,
            k_n: None,
            ks_threshold: 0.02,
            joint_threshold: 0.02,
            factor_threshold: 0.03,
            mean_sigmas: 3.0,
            product_threshold: 1e-3,
        }
    }
}

/// Outcome of one check in the battery.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckResult {
    pub name: String,
    pub n: u64,
    pub draws: u64,
    pub value: f64,
    pub threshold: f64,
    /// Informational checks are reported but never fail the suite.
    pub mandatory: bool,
    pub pass: bool,
    pub note: String,
}

impl CheckResult {
    fn new(name: &str, n: u64, draws: u64, value: f64, threshold: f64, mandatory: bool, note: String) -> Self {
        CheckResult {
            name: name.to_string(),
            n,
            draws,
            value,
            threshold,
            mandatory,
            pass: value < threshold,
            note,
        }
    }

    fn failed(name: &str, n: u64, note: String) -> Self {
        CheckResult {
            name: name.to_string(),
            n,
            draws: 0,
            value: f64::NAN,
            threshold: f64::NAN,
            mandatory: true,
            pass: false,
            note,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass || !c.mandatory)
    }

    pub fn find(&self, name: &str) -> impl Iterator<Item = &CheckResult> {
        let name = name.to_string();
        self.checks.iter().filter(move |c| c.name == name)
    }
}

/// KS distance of the exact rank law at `n`, rescaled by `sqrt(3n/2)`,
/// from the hyperbolic secant law.
pub fn exact_rank_ks(n: usize) -> Result<f64> {
    let law = rank_distribution(n);
    let total = law.total().to_f64().unwrap_or(f64::INFINITY);
    let scale = (1.5 * n as f64).sqrt();
    let atoms: Vec<(f64, f64)> = law
        .counts
        .iter()
        .map(|(&m, c)| (m as f64 / scale, c.to_f64().unwrap_or(f64::INFINITY) / total))
        .collect();
    ks_distance_weighted(&atoms, |x| LimitLaw::SechUnit.cdf(x))
}

/// `s log(2s) + s (gamma - log 2)` with `s = B sqrt(n)`.
pub fn expected_peak_closed_form(n: f64) -> f64 {
    let s = B * n.sqrt();
    s * (2.0 * s).ln() + s * (EULER_GAMMA - core::f64::consts::LN_2)
}

/// Free-mode statistics collected in a single pass.
struct LargeSample {
    peak: Vec<f64>,
    y_left: Vec<f64>,
    y_right: Vec<f64>,
    exp_left: Vec<Vec<f64>>,
    exp_right: Vec<Vec<f64>>,
    geo_left: Vec<f64>,
    geo_right: Vec<f64>,
    sum_left: Vec<f64>,
    sum_right: Vec<f64>,
}

fn collect_large(p: &BoltzmannParams, cfg: &LimitSuiteConfig, k_n: u64) -> LargeSample {
    let mut rng = stream_rng(cfg.seed, 0);
    let mut rec = SampleRecord::default();
    let cap = cfg.draws as usize;
    let kg = cfg.geometric_part.div_ceil(2);
    let mut out = LargeSample {
        peak: Vec::with_capacity(cap),
        y_left: Vec::with_capacity(cap),
        y_right: Vec::with_capacity(cap),
        exp_left: vec![Vec::with_capacity(cap); cfg.exp_ks.len()],
        exp_right: vec![Vec::with_capacity(cap); cfg.exp_ks.len()],
        geo_left: Vec::with_capacity(cap),
        geo_right: Vec::with_capacity(cap),
        sum_left: Vec::with_capacity(cap),
        sum_right: Vec::with_capacity(cap),
    };
    for _ in 0..cfg.draws {
        sample_free_into(p, &mut rng, &mut rec);
        out.peak.push(p.peak_statistic(&rec));
        out.y_left.push(p.largest_part_statistic(&rec, Side::Left, 1).unwrap_or(f64::NEG_INFINITY));
        out.y_right.push(p.largest_part_statistic(&rec, Side::Right, 1).unwrap_or(f64::NEG_INFINITY));
        for (i, &k) in cfg.exp_ks.iter().enumerate() {
            out.exp_left[i].push(p.small_part_statistic(&rec, Side::Left, k));
            out.exp_right[i].push(p.small_part_statistic(&rec, Side::Right, k));
        }
        out.geo_left.push(rec.count(Side::Left, kg) as f64);
        out.geo_right.push(rec.count(Side::Right, kg) as f64);
        out.sum_left.push(p.small_sum_statistic(&rec, Side::Left, k_n));
        out.sum_right.push(p.small_sum_statistic(&rec, Side::Right, k_n));
    }
    out
}

/// `max |F_joint - F_L F_R|` over a grid, all from the same paired sample.
fn factorization_gap(left: &[f64], right: &[f64], grid_l: &[f64], grid_r: &[f64]) -> f64 {
    let n = left.len() as f64;
    let mut gap: f64 = 0.0;
    for &a in grid_l {
        for &b in grid_r {
            let joint = left.iter().zip(right).filter(|(x, y)| **x <= a && **y <= b).count() as f64 / n;
            let fl = left.iter().filter(|x| **x <= a).count() as f64 / n;
            let fr = right.iter().filter(|y| **y <= b).count() as f64 / n;
            gap = gap.max((joint - fl * fr).abs());
        }
    }
    gap
}

/// Runs the limit-law battery. Sub-check failures are recorded, not fatal.
pub fn limit_suite(cfg: &LimitSuiteConfig) -> SuiteReport {
    let mut checks = Vec::new();

    // exact rank law against the hyperbolic secant
    let mut ks_list = Vec::new();
    for &n in &cfg.rank_ns {
        match exact_rank_ks(n) {
            Ok(d) => {
                checks.push(CheckResult::new("rank_sech_ks", n as u64, 0, d, 1.0, false, String::new()));
                ks_list.push(d);
            }
            Err(e) => checks.push(CheckResult::failed("rank_sech_ks", n as u64, e.to_string())),
        }
    }
    if ks_list.len() == cfg.rank_ns.len() && !ks_list.is_empty() {
        let worst_step = ks_list.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        let value = if ks_list.len() < 2 { -1.0 } else { worst_step };
        checks.push(CheckResult::new(
            "rank_sech_ks_decreasing",
            *cfg.rank_ns.last().unwrap() as u64,
            0,
            value,
            0.0,
            true,
            format!("largest successive change {value:.3e}; KS sequence {ks_list:?}"),
        ));
    }

    // large-part product at n = 1e8
    for v in [-1.0, 0.0, 1.0, 2.0] {
        let d = (large_part_product(1e8, v) - gumbel_half_cdf(v)).abs();
        checks.push(CheckResult::new(
            "large_part_product",
            100_000_000,
            0,
            d,
            cfg.product_threshold,
            true,
            format!("v = {v}"),
        ));
    }

    // mean peak at moderate n
    match BoltzmannParams::new(cfg.mean_n) {
        Ok(p) => {
            let mut rng = stream_rng(cfg.seed, 1);
            let mut rec = SampleRecord::default();
            let mut mo = Moments::default();
            for _ in 0..cfg.draws {
                sample_free_into(&p, &mut rng, &mut rec);
                mo.push(rec.peak() as f64);
            }
            let closed = expected_peak_closed_form(cfg.mean_n as f64);
            let z = (mo.mean() - closed).abs() / mo.standard_error();
            checks.push(CheckResult::new(
                "peak_mean",
                cfg.mean_n,
                cfg.draws,
                z,
                cfg.mean_sigmas,
                true,
                format!("sample mean {:.4}, closed form {closed:.4}, standard error {:.4}", mo.mean(), mo.standard_error()),
            ));
        }
        Err(e) => checks.push(CheckResult::failed("peak_mean", cfg.mean_n, e.to_string())),
    }

    let n = cfg.sample_n;
    let p = match BoltzmannParams::new(n) {
        Ok(p) => p,
        Err(e) => {
            checks.push(CheckResult::failed("free_sampler", n, e.to_string()));
            return SuiteReport { checks };
        }
    };
    let k_n = cfg.k_n.unwrap_or_else(|| ((n as f64).powf(0.25).floor() as u64).max(1));
    let mut big = collect_large(&p, cfg, k_n);
    let d = cfg.draws;
    let ks = |name: &str, sample: &mut Vec<f64>, law: LimitLaw, thr: f64, mandatory: bool, note: String| {
        sample.sort_by(|a, b| a.total_cmp(b));
        match ks_distance(sample, &law) {
            Ok(v) => CheckResult::new(name, n, d, v, thr, mandatory, note),
            Err(e) => CheckResult::failed(name, n, e.to_string()),
        }
    };

    checks.push(ks(
        "peak_gumbel_ks",
        &mut big.peak.clone(),
        LimitLaw::GumbelHalf,
        cfg.ks_threshold,
        true,
        String::new(),
    ));

    // one ordered part per side
    for (name, ys) in [("largest_left_ks", &big.y_left), ("largest_right_ks", &big.y_right)] {
        let mut s = ys.clone();
        s.sort_by(|a, b| a.total_cmp(b));
        let v = ks_distance_cdf(&s, largest_part_marginal_cdf).unwrap_or(f64::NAN);
        checks.push(CheckResult::new(name, n, d, v, cfg.joint_threshold, true, String::new()));
    }
    let mut gap: f64 = 0.0;
    let pts = [-0.5, 0.5, 1.5];
    for &v0 in &pts {
        for &vl in &pts {
            for &vr in &pts {
                let emp = (0..big.peak.len())
                    .filter(|&i| big.peak[i] <= v0 && big.y_left[i] <= vl && big.y_right[i] <= vr)
                    .count() as f64
                    / d as f64;
                gap = gap.max((emp - peak_largest_joint_cdf(v0, vl, vr)).abs());
            }
        }
    }
    checks.push(CheckResult::new(
        "peak_largest_joint_cdf",
        n,
        d,
        gap,
        cfg.joint_threshold,
        true,
        format!("max gap over (v0, vL, vR) in {pts:?}^3"),
    ));

    // left/right joint law of the smallest part count
    if !cfg.exp_ks.is_empty() {
        let grid = [0.5, 1.0, 2.0];
        let (l, r) = (&big.exp_left[0], &big.exp_right[0]);
        let mut gap: f64 = 0.0;
        for &a in &grid {
            for &b in &grid {
                let emp = l.iter().zip(r).filter(|(x, y)| **x <= a && **y <= b).count() as f64 / d as f64;
                gap = gap.max((emp - LimitLaw::ExpUnit.cdf(a) * LimitLaw::ExpUnit.cdf(b)).abs());
            }
        }
        checks.push(CheckResult::new(
            "small_part_joint_cdf",
            n,
            d,
            gap,
            cfg.joint_threshold,
            true,
            format!("part {}, grid {grid:?}^2", 2 * cfg.exp_ks[0] - 1),
        ));
    }
    // exponential marginals of the smallest parts
    for (i, &k) in cfg.exp_ks.iter().enumerate() {
        for (side, s) in [("left", &mut big.exp_left[i]), ("right", &mut big.exp_right[i])] {
            checks.push(ks(
                "small_part_exp_ks",
                s,
                LimitLaw::ExpUnit,
                cfg.ks_threshold,
                true,
                format!("part {}, {side}", 2 * k - 1),
            ));
        }
    }
    let c = cfg.geometric_part as f64 / (n as f64).sqrt();
    for (side, s) in [("left", &mut big.geo_left), ("right", &mut big.geo_right)] {
        checks.push(ks(
            "geometric_part_ks",
            s,
            LimitLaw::GeometricCb { c },
            cfg.ks_threshold,
            true,
            format!("part {}, c = {c}, {side}", cfg.geometric_part),
        ));
    }

    // small-part sums: factorization is mandatory, the per-coordinate law is reported
    let q = [0.25, 0.5, 0.75];
    let (sl, sr) = (sorted(big.sum_left.clone()), sorted(big.sum_right.clone()));
    let gl: Vec<f64> = q.iter().map(|&p| quantile(&sl, p)).collect();
    let gr: Vec<f64> = q.iter().map(|&p| quantile(&sr, p)).collect();
    let fg = factorization_gap(&big.sum_left, &big.sum_right, &gl, &gr);
    checks.push(CheckResult::new(
        "small_sum_factorization",
        n,
        d,
        fg,
        cfg.factor_threshold,
        true,
        format!("k_n = {k_n}, grid at empirical quartiles"),
    ));
    for (side, s) in [("left", sl), ("right", sr)] {
        let mut s = s;
        checks.push(ks(
            "small_sum_gumbel_ks",
            &mut s,
            LimitLaw::GumbelHalf,
            cfg.ks_threshold,
            false,
            format!("k_n = {k_n}, {side}, centering s log(2 k_n - 1)"),
        ));
    }
    SuiteReport { checks }
}
