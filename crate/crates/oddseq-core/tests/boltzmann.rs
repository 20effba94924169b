use oddseq_core::boltzmann::*;
use oddseq_core::exact::{brute_force_enumerate, ou_counts};
use oddseq_core::stats::{chi_square_statistic, expected_peak_closed_form};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn q_monotone_in_n() {
    let mut last = 0.0;
    for e in 0..=60 {
        let n = 10f64.powf(e as f64 / 10.0);
        let q = q_of_n(n);
        assert!(q > last && q < 1.0);
        last = q;
    }
}

#[test]
fn same_seed_same_records() {
    let p = BoltzmannParams::new(5000).unwrap();
    let a: Vec<_> = (0..50).scan(stream_rng(7, 3), |r, _| Some(sample_free(&p, r))).collect();
    let b: Vec<_> = (0..50).scan(stream_rng(7, 3), |r, _| Some(sample_free(&p, r))).collect();
    assert_eq!(a, b);
    let c: Vec<_> = (0..50).scan(stream_rng(7, 4), |r, _| Some(sample_free(&p, r))).collect();
    assert_ne!(a, c);
}

#[test]
fn counts_stop_at_peak() {
    let p = BoltzmannParams::new(2000).unwrap();
    let mut rng = stream_rng(1, 0);
    for _ in 0..2000 {
        let r = sample_free(&p, &mut rng);
        assert_eq!(r.x_left.len() as u64, r.m + 1);
        assert_eq!(r.x_right.len() as u64, r.m + 1);
        assert_eq!(r.count(Side::Left, r.m + 2), 0);
        assert!(r.weight() >= r.peak());
        for side in [Side::Left, Side::Right] {
            let ys: Vec<_> = (1..=4).filter_map(|t| r.largest_part(side, t)).collect();
            assert!(ys.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}

#[test]
fn geometric_counts_have_the_right_mean_and_variance() {
    let p = BoltzmannParams::new(10_000).unwrap();
    let mut rng = stream_rng(11, 0);
    let ks = [1u64, 5, 20, 60];
    let mut mo = vec![Moments::default(); ks.len()];
    let mut rec = SampleRecord::default();
    for _ in 0..100_000 {
        sample_free_into(&p, &mut rng, &mut rec);
        for (i, &k) in ks.iter().enumerate() {
            if k <= rec.m + 1 {
                mo[i].push(rec.count(Side::Left, k) as f64);
            }
        }
    }
    for (i, &k) in ks.iter().enumerate() {
        let mean = p.geometric_mean(k);
        let z = (mo[i].mean() - mean).abs() / mo[i].standard_error();
        assert!(z < 4.0, "k = {k}: z = {z}");
        let var = p.geometric_variance(k);
        assert!((mo[i].variance() / var - 1.0).abs() < 0.05, "k = {k}");
    }
}

#[test]
fn exact_peak_law_mean_near_closed_form() {
    let p = BoltzmannParams::new(10_000).unwrap();
    let d = p.expected_peak() - expected_peak_closed_form(10_000.0);
    assert!(d.abs() < 1.0, "{d}");
}

#[test]
fn exact_size_uniform_small_n() {
    for (n, draws) in [(7u64, 100_000u64), (10, 40_000), (12, 40_000)] {
        let support = brute_force_enumerate(n as usize).unwrap();
        assert_eq!(support.len() as u64, u64::try_from(&ou_counts(n as usize)[n as usize]).unwrap());
        let p = BoltzmannParams::new(n).unwrap();
        let mut rng = stream_rng(2024, n);
        let (freq, _) = exact_frequencies(&p, &mut rng, &support, draws, 1_000_000).unwrap();
        let probs = vec![1.0 / support.len() as f64; support.len()];
        let chi = chi_square_statistic(&freq, &probs).unwrap();
        let pval = 1.0 - ChiSquared::new((support.len() - 1) as f64).unwrap().cdf(chi);
        assert!(pval > 0.001, "n = {n}: chi = {chi}, p = {pval}");
    }
}

#[test]
fn acceptance_rate_matches_prediction() {
    let n = 400;
    let p = BoltzmannParams::new(n).unwrap();
    let mut rng = stream_rng(5, 0);
    let mut attempts = 0;
    let accepted = 2000;
    for _ in 0..accepted {
        let s = sample_exact(&p, &mut rng, 10_000_000).unwrap();
        assert_eq!(s.record.weight(), n);
        attempts += s.attempts;
    }
    let rate = accepted as f64 / attempts as f64;
    let pred = acceptance_rate_asymptotic(n as f64);
    assert!(rate / pred < 2.0 && pred / rate < 2.0, "{rate} vs {pred}");
}

#[test]
fn exhausted_attempts_is_resource_error() {
    let p = BoltzmannParams::new(3000).unwrap();
    let mut rng = stream_rng(0, 0);
    let r = sample_exact(&p, &mut rng, 0);
    assert!(matches!(r, Err(oddseq_core::Error::Resource(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn records_are_valid_sequences(seed in any::<u64>(), n in 1u64..5000) {
        let p = BoltzmannParams::new(n).unwrap();
        let mut rng = stream_rng(seed, 0);
        let r = sample_free(&p, &mut rng);
        let s = r.to_sequence();
        prop_assert!(s.is_valid());
        prop_assert_eq!(s.weight(), r.weight());
        prop_assert_eq!(s.rank(), r.rank());
    }
}
