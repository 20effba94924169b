use oddseq_core::special::{gumbel_half_cdf, LimitLaw};
use oddseq_core::stats::*;
use proptest::prelude::*;

/// Deterministic uniforms on (0, 1).
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }
}

#[test]
fn sample_from_the_law_is_close() {
    let mut g = Lcg(9);
    // inverse CDFs
    let sech: Vec<f64> = (0..100_000).map(|_| (2.0 / std::f64::consts::PI) * (std::f64::consts::FRAC_PI_2 * g.next()).tan().ln()).collect();
    let gum: Vec<f64> = (0..100_000).map(|_| -(-2.0 * g.next().ln()).ln()).collect();
    assert!(ks_distance(&sorted(sech), &LimitLaw::SechUnit).unwrap() < 0.01);
    assert!(ks_distance(&sorted(gum), &LimitLaw::GumbelHalf).unwrap() < 0.01);
}

#[test]
fn geometric_law_against_itself() {
    let c = 0.8;
    let mut g = Lcg(3);
    let rate = c / oddseq_core::special::B;
    let s: Vec<f64> = (0..50_000).map(|_| (g.next().ln() / -rate).floor()).collect();
    let d = ks_distance(&sorted(s), &LimitLaw::GeometricCb { c }).unwrap();
    assert!(d < 0.01, "{d}");
}

#[test]
fn discrete_sample_against_its_own_atoms() {
    // sample equal to the law's quantiles at integer atoms: KS is the largest atom mass gap
    let s = vec![0.0, 0.0, 1.0, 2.0];
    let d = ks_distance(&s, &LimitLaw::GeometricCb { c: 10.0 }).unwrap();
    // law puts almost all mass at 0; empirical puts half
    assert!((d - 0.5).abs() < 1e-4);
}

#[test]
fn weighted_equals_sample_version() {
    let s = vec![-1.0, -0.2, 0.3, 0.3, 1.7];
    let a = ks_distance_cdf(&s, gumbel_half_cdf).unwrap();
    let atoms = vec![(-1.0, 0.2), (-0.2, 0.2), (0.3, 0.4), (1.7, 0.2)];
    let b = ks_distance_weighted(&atoms, gumbel_half_cdf).unwrap();
    assert!((a - b).abs() < 1e-15);
}

#[test]
fn exact_rank_law_approaches_sech() {
    let ks: Vec<f64> = [32usize, 64, 128].iter().map(|&n| exact_rank_ks(n).unwrap()).collect();
    assert!(ks.windows(2).all(|w| w[1] < w[0]), "{ks:?}");
}

#[test]
fn chi_square_of_perfect_fit_is_zero() {
    assert_eq!(chi_square_statistic(&[25, 25, 50], &[0.25, 0.25, 0.5]).unwrap(), 0.0);
    assert!(chi_square_statistic(&[1], &[0.5, 0.5]).is_err());
}

#[test]
fn small_suite_is_deterministic_and_complete() {
    let cfg = LimitSuiteConfig {
        rank_ns: vec![16, 32],
        sample_n: 20_000,
        mean_n: 2_000,
        draws: 4_000,
        seed: 5,
        ..Default::default()
    };
    let a = limit_suite(&cfg);
    let b = limit_suite(&cfg);
    assert_eq!(a, b);
    for name in [
        "rank_sech_ks",
        "rank_sech_ks_decreasing",
        "large_part_product",
        "peak_mean",
        "peak_gumbel_ks",
        "largest_left_ks",
        "peak_largest_joint_cdf",
        "small_part_joint_cdf",
        "small_part_exp_ks",
        "geometric_part_ks",
        "small_sum_factorization",
        "small_sum_gumbel_ks",
    ] {
        assert!(a.find(name).next().is_some(), "{name}");
    }
}

proptest! {
    #[test]
    fn ks_in_unit_interval(mut v in prop::collection::vec(-50.0f64..50.0, 1..200)) {
        v.sort_by(|a, b| a.total_cmp(b));
        for law in [LimitLaw::SechUnit, LimitLaw::GumbelHalf, LimitLaw::ExpUnit, LimitLaw::GeometricCb { c: 1.0 }] {
            let d = ks_distance(&v, &law).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }

    #[test]
    fn tv_is_a_metric_on_pairs(p in prop::collection::vec(0.0f64..1.0, 5), q in prop::collection::vec(0.0f64..1.0, 5)) {
        let norm = |v: &Vec<f64>| { let s: f64 = v.iter().sum::<f64>() + 1e-9; v.iter().map(|x| x / s).collect::<Vec<_>>() };
        let (p, q) = (norm(&p), norm(&q));
        let d = tv_distance_discrete(&p, &q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert!((d - tv_distance_discrete(&q, &p).unwrap()).abs() < 1e-15);
    }
}
