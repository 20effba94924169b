//! Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::cell::OnceCell;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use oddseq::verify::{modular_suite, MODULAR_TOLERANCE};
use oddseq_core::asympt::{
    ln_ou_main_term, ln_saddle_ou_m, moment_asymptotic, peak_lattice_sum, peak_r, rademacher_p, QuadratureSpec,
    SaddleFunction, IMAG_TOLERANCE,
};
use oddseq_core::boltzmann::{acceptance_rate_asymptotic, exact_frequencies, sample_exact, stream_rng, BoltzmannParams};
use oddseq_core::exact::{
    brute_force_enumerate, ln_bigint, ln_biguint, ou_counts, ou_peak_row, partition_count, rank_distribution,
    rank_moments,
};
use oddseq_core::stats::{chi_square_statistic, exact_rank_ks, limit_suite, LimitSuiteConfig, SuiteReport};
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn strictly_toward_one(r: &[f64]) -> bool {
    r.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs())
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.5}")).collect::<Vec<_>>().join(", ")
}

fn c1() -> Outcome {
    let ou = ou_counts(25);
    let first: Vec<u64> = ou[..8].iter().map(|c| u64::try_from(c).unwrap()).collect();
    if first != [0, 1, 2, 4, 6, 9, 14, 20] {
        return Err(format!("ou(0..7) = {first:?}"));
    }
    for n in 0..=25 {
        let brute = brute_force_enumerate(n).map_err(|e| e.to_string())?.len() as u64;
        if u64::try_from(&ou[n]).unwrap() != brute {
            return Err(format!("n = {n}: series {} vs brute force {brute}", ou[n]));
        }
    }
    Ok(format!("n <= 25 agree, ou(25) = {}", ou[25]))
}

fn c2() -> Outcome {
    for n in 0..=100 {
        if !rank_distribution(n).is_symmetric() {
            return Err(format!("rank law at n = {n} not symmetric"));
        }
    }
    let mom = rank_moments(100, 7);
    for l in (1..=7).step_by(2) {
        if let Some(n) = (0..=100).find(|&n| mom[l][n].bits() != 0) {
            return Err(format!("ou_{l}({n}) = {}", mom[l][n]));
        }
    }
    check(mom[2][3].to_string() == "8", format!("symmetric for n <= 100, odd moments 1..7 vanish, ou_2(3) = {}", mom[2][3]))
}

fn c3() -> Outcome {
    let p = partition_count(500);
    for n in 1..=500u64 {
        let r = rademacher_p(n, None).map_err(|e| e.to_string())?;
        if r.rounded.to_string() != p[n as usize].to_string() {
            return Err(format!("n = {n}: {} vs {}", r.rounded, p[n as usize]));
        }
    }
    Ok(format!("p(1..=500) reproduced, p(500) = {}", p[500]))
}

fn c4() -> Outcome {
    let r = modular_suite(MODULAR_TOLERANCE).map_err(|e| e.to_string())?;
    let families = [
        "theta_farey",
        "eta_farey",
        "cstar_farey",
        "theta_double_odd",
        "eta_double_odd",
        "cstar_double_odd",
        "theta_double_even",
        "eta_double_even",
        "cstar_double_even",
        "theta_quasi_period",
        "theta_odd",
        "ou_decomposition",
    ];
    let missing: Vec<_> = families.iter().filter(|f| !r.results.iter().any(|x| x.identity == **f && x.mandatory)).collect();
    if !missing.is_empty() {
        return Err(format!("no rows for {missing:?}"));
    }
    check(
        r.pass,
        format!("{} mandatory identities, max residual {:.2e}", r.mandatory_checks, r.max_mandatory_residual),
    )
}

const GRID: [usize; 4] = [250, 500, 1000, 2000];

fn c5() -> Outcome {
    let ou = ou_counts(2000);
    let r: Vec<f64> = GRID.iter().map(|&n| (ln_biguint(&ou[n]) - ln_ou_main_term(n as f64)).exp()).collect();
    check(strictly_toward_one(&r) && (r[3] - 1.0).abs() < 0.10, format!("ratios {}", fmt(&r)))
}

fn c6() -> Outcome {
    let mom = rank_moments(2000, 4);
    let ratio = |l: usize, c: f64, n: usize| {
        let ln = ln_bigint(&mom[l][n]).unwrap() - ln_bigint(&mom[0][n]).unwrap();
        (ln - (c * (n as f64).powi(l as i32 / 2)).ln()).exp()
    };
    let r2: Vec<f64> = GRID.iter().map(|&n| ratio(2, 1.5, n)).collect();
    let r4: Vec<f64> = GRID.iter().map(|&n| ratio(4, 45.0 / 4.0, n)).collect();
    check(
        strictly_toward_one(&r2) && strictly_toward_one(&r4),
        format!("second [{}], fourth [{}]", fmt(&r2), fmt(&r4)),
    )
}

fn c7() -> Outcome {
    let ns = [200u64, 500, 1000];
    let mom = rank_moments(1000, 2);
    let quad = QuadratureSpec::default();
    let mut detail = Vec::new();
    let mut ok = true;
    for l in [0usize, 2] {
        let mut errs = Vec::new();
        let mut worst_im = 0f64;
        for &n in &ns {
            let a = moment_asymptotic(n, l, None, &quad).map_err(|e| e.to_string())?;
            let rel = (a.ln_value() - ln_bigint(&mom[l][n as usize]).unwrap()).exp() - 1.0;
            errs.push(rel.abs());
            worst_im = worst_im.max(a.imag_ratio());
        }
        ok &= errs.windows(2).all(|w| w[1] < w[0]) && worst_im < IMAG_TOLERANCE;
        detail.push(format!("ell={l}: rel err [{}], max Im/Re {worst_im:.1e}", fmt(&errs)));
    }
    check(ok, detail.join("; "))
}

fn c8() -> Outcome {
    let n = 2000u64;
    let row = ou_peak_row(n as usize);
    let mut worst = 0f64;
    let mut peaks = 0;
    for (m, c) in row.iter().enumerate() {
        if c.bits() == 0 || peak_r(n as f64, m as f64).abs() > 1.0 {
            continue;
        }
        let ls = ln_saddle_ou_m(n, m as u64).map_err(|e| e.to_string())?;
        worst = worst.max(((ls - ln_biguint(c)).exp() - 1.0).abs());
        peaks += 1;
    }
    let mut f2 = Vec::new();
    for n in [1_000u64, 10_000, 100_000] {
        let s = 6f64.sqrt() / PI * (n as f64).sqrt();
        let m = ((s * (2.0 * s).ln() - 1.0) / 2.0).round() as u64;
        let f = SaddleFunction::new(n, m).map_err(|e| e.to_string())?;
        f2.push(f.f2() / (2.0 * 6f64.sqrt() / PI * (n as f64).powf(1.5)));
    }
    let total = peak_lattice_sum(1e6);
    check(
        peaks > 0 && worst < 0.15 && strictly_toward_one(&f2) && (total - 1.0).abs() < 1e-3,
        format!(
            "{peaks} peaks with |r| <= 1, worst rel err {worst:.4}; f'' ratios [{}]; density sum {total:.6}",
            fmt(&f2)
        ),
    )
}

fn c9() -> Outcome {
    let ks: Vec<f64> = [64, 128, 256, 512].iter().map(|&n| exact_rank_ks(n).unwrap()).collect();
    check(ks.windows(2).all(|w| w[1] < w[0]), format!("KS [{}]", fmt(&ks)))
}

fn suite_checks(report: &SuiteReport, names: &[&str]) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for name in names {
        let rows: Vec<_> = report.find(name).collect();
        if rows.is_empty() {
            return Err(format!("{name} missing from report"));
        }
        for c in rows {
            ok &= c.pass;
            detail.push(format!("{} {:.4} (<= {}{})", c.name, c.value, c.threshold, if c.note.is_empty() { String::new() } else { format!(", {}", c.note) }));
        }
    }
    check(ok, detail.join("; "))
}

fn c10(report: &SuiteReport) -> Outcome {
    suite_checks(report, &["peak_gumbel_ks", "peak_mean"])
}

fn c11(report: &SuiteReport) -> Outcome {
    suite_checks(report, &["small_part_exp_ks", "geometric_part_ks", "small_sum_factorization", "large_part_product"])
}

fn c12() -> Outcome {
    let support = brute_force_enumerate(7).map_err(|e| e.to_string())?;
    let p = BoltzmannParams::new(7).map_err(|e| e.to_string())?;
    let mut rng = stream_rng(42, 7);
    let (freq, _) = exact_frequencies(&p, &mut rng, &support, 100_000, 1_000_000).map_err(|e| e.to_string())?;
    let probs = vec![1.0 / support.len() as f64; support.len()];
    let chi = chi_square_statistic(&freq, &probs).map_err(|e| e.to_string())?;
    let pval = 1.0 - ChiSquared::new((support.len() - 1) as f64).unwrap().cdf(chi);

    let n = 400;
    let p = BoltzmannParams::new(n).map_err(|e| e.to_string())?;
    let mut rng = stream_rng(42, n);
    let accepted = 2000u64;
    let mut attempts = 0;
    for _ in 0..accepted {
        attempts += sample_exact(&p, &mut rng, 10_000_000).map_err(|e| e.to_string())?.attempts;
    }
    let rate = accepted as f64 / attempts as f64;
    let pred = acceptance_rate_asymptotic(n as f64);
    check(
        support.len() == 20 && pval > 0.001 && rate / pred < 2.0 && pred / rate < 2.0,
        format!("{} sequences, chi2 {chi:.2}, p {pval:.3}; acceptance {rate:.5} vs predicted {pred:.5}", support.len()),
    )
}

fn main() {
    let suite: OnceCell<SuiteReport> = OnceCell::new();
    let limits = || suite.get_or_init(|| limit_suite(&LimitSuiteConfig { seed: 42, ..Default::default() }));
    let secs = Duration::from_secs;
    let criteria: Vec<(u32, &str, Option<Duration>, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "enumeration oracle equivalence", Some(secs(10)), Box::new(c1)),
        (2, "rank symmetry and moments", Some(secs(10)), Box::new(c2)),
        (3, "Rademacher reproduction", Some(secs(60)), Box::new(c3)),
        (4, "modular transformation residuals", Some(secs(60)), Box::new(c4)),
        (5, "main-term convergence", Some(secs(300)), Box::new(c5)),
        (6, "second and fourth moment ratios", Some(secs(600)), Box::new(c6)),
        (7, "Kloosterman-Bessel moment series", Some(secs(600)), Box::new(c7)),
        (8, "saddle point", None, Box::new(c8)),
        (9, "sech rank law trend", None, Box::new(c9)),
        (10, "peak law", None, Box::new(|| c10(limits()))),
        (11, "small parts", None, Box::new(|| c11(limits()))),
        (12, "exact-size uniformity", None, Box::new(c12)),
    ];
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        let t = Instant::now();
        let out = f();
        let dt = t.elapsed();
        let over = budget.is_some_and(|b| dt > b);
        let (ok, detail) = match out {
            Ok(d) => (!over, d),
            Err(d) => (false, d),
        };
        let limit = budget.map_or(String::new(), |b| format!(" of {} s", b.as_secs()));
        println!(
            "{} criterion {id:>2} {name}: {detail} [{:.1} s{limit}]",
            if ok { "PASS" } else { "FAIL" },
            dt.as_secs_f64()
        );
        failed += usize::from(!ok);
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
