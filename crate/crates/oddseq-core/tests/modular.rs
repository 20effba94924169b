use num_complex::Complex64;
use num_integer::Integer;
use oddseq_core::exact::rank_distribution;
use oddseq_core::modular::*;
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn frames() -> Vec<FareyFrame> {
    let mut v = Vec::new();
    for k in 1..=6 {
        for h in 0..k {
            if h.gcd(&k) == 1 {
                v.push(FareyFrame::new(h, k).unwrap());
            }
        }
    }
    v
}

#[test]
fn jacobi_transforms_hold() {
    for f in frames() {
        for z in [Complex64::new(1.0, 0.0), Complex64::new(0.8, 0.3)] {
            for u in [0.1, -0.07] {
                for r in verify_jacobi_transforms(&f, z, u).unwrap() {
                    eprintln!("{} {} {:e}", r.identity, r.parameters, r.residual);
                    assert!(r.passes(TOL), "{r:?}");
                }
            }
        }
    }
}

#[test]
fn inverse_multiplier_rows_fail() {
    let f = FareyFrame::new(1, 3).unwrap();
    let rows = verify_jacobi_transforms(&f, Complex64::new(1.0, 0.0), 0.1).unwrap();
    let r = rows.iter().find(|r| r.identity == "cstar_farey_inverse_multiplier").unwrap();
    assert!(!r.mandatory && r.residual > 1e-3);
}

#[test]
fn decomposition_matches_exact_series() {
    let laws: Vec<_> = (0..=40).map(rank_distribution).collect();
    for (u, tau) in [
        (0.1, Complex64::new(0.05, 0.35)),
        (0.0, Complex64::new(0.0, 0.4)),
        (0.23, Complex64::new(-0.2, 0.5)),
    ] {
        let rows = verify_ou_decomposition(u, tau, &laws).unwrap();
        eprintln!("{rows:?}");
        assert!(rows[0].residual < 1e-9, "{rows:?}");
        assert!(rows[1].residual > 1e-6);
    }
}

#[test]
fn triple_product_grid() {
    for a in 0..5 {
        for b in 0..5 {
            let u = Complex64::new(-0.4 + 0.2 * a as f64, 0.03 * b as f64);
            let tau = Complex64::new(0.1 * b as f64 - 0.2, 0.2 + 0.15 * a as f64);
            let d = eval_theta(u, tau).unwrap() - eval_theta_product(u, tau).unwrap();
            assert!(d.norm() < 1e-12, "{u} {tau} {d}");
        }
    }
}

#[test]
fn multiplier_is_periodic_in_small_kloosterman() {
    for k in 1..8i64 {
        for n in 0..4 {
            let a = kloosterman_a(k, n).unwrap();
            let b = kloosterman_a(k, n + k).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }
}

fn eta_transform_residual(m: Sl2, tau: Complex64) -> f64 {
    let lhs = eval_eta(m.act(tau)).unwrap();
    let ct = tau * m.c as f64 + m.d as f64;
    let rhs = eta_multiplier(&m).unwrap().to_complex() * ct.sqrt() * eval_eta(tau).unwrap();
    (lhs - rhs).norm() / lhs.norm()
}

proptest! {
    #[test]
    fn multiplier_is_unimodular(a in -30i64..30, c in 1i64..30) {
        prop_assume!(a.gcd(&c) == 1);
        let g = a.extended_gcd(&c);
        let m = Sl2::new(a, -g.y, c, g.x).unwrap();
        let chi = eta_multiplier(&m).unwrap().to_complex();
        prop_assert!((chi.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eta_law_for_positive_c(a in -6i64..6, c in 1i64..5) {
        prop_assume!(a.gcd(&c) == 1);
        let g = a.extended_gcd(&c);
        let m = Sl2::new(a, -g.y, c, g.x).unwrap();
        // pick tau so that both tau and M tau stay well inside the half plane
        let tau = Complex64::new(-(m.d as f64) / c as f64, 1.0 / c as f64);
        prop_assert!(eta_transform_residual(m, tau) < 1e-10);
    }

    #[test]
    fn kloosterman_k1_is_periodic(k in (0i64..4).prop_map(|j| 2 * j + 1), n in 0i64..20, v in 0i64..8) {
        let v = v % (2 * k);
        let a = kloosterman_k1(k, n, v).unwrap();
        let b = kloosterman_k1(k, n + k, v).unwrap();
        prop_assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn farey_matrices_have_unit_determinant() {
    for k in 1..30i64 {
        for h in 0..k {
            if h.gcd(&k) != 1 {
                continue;
            }
            assert_eq!(farey_matrix(h, k).unwrap().det(), 1);
            if k % 2 == 1 {
                assert_eq!(farey_matrix_double(h, k).unwrap().det(), 1);
            } else {
                assert_eq!(farey_matrix_half(h, k).unwrap().det(), 1);
            }
        }
    }
}

#[test]
fn bad_determinant_is_structural() {
    assert!(matches!(Sl2::new(1, 1, 1, 1), Err(oddseq_core::Error::Structural(_))));
}
