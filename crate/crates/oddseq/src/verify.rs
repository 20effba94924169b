//! Verification suites behind `oddseq verify`.

use num_complex::Complex64;
use num_integer::Integer;
use oddseq_core::exact::rank_distribution;
use oddseq_core::modular::{eval_theta, eval_theta_product, verify_jacobi_transforms, verify_ou_decomposition, FareyFrame, IdentityResidual};
use oddseq_core::stats::{limit_suite, LimitSuiteConfig, SuiteReport};
use serde::Serialize;

use crate::error::Result;

pub const MODULAR_TOLERANCE: f64 = 1e-8;
/// Largest Farey denominator on the transformation grid.
pub const MODULAR_K_MAX: i64 = 6;
/// Truncation order of the exact side of the decomposition check.
pub const DECOMPOSITION_ORDER: usize = 40;

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub identity: String,
    pub parameters: String,
    pub residual: f64,
    pub mandatory: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModularReport {
    pub suite: &'static str,
    pub tolerance: f64,
    pub pass: bool,
    pub mandatory_checks: usize,
    pub max_mandatory_residual: f64,
    pub results: Vec<ResidualRow>,
}

/// Every coprime `0 <= h < k <= k_max`.
pub fn farey_grid(k_max: i64) -> Result<Vec<FareyFrame>> {
    let mut v = Vec::new();
    for k in 1..=k_max {
        for h in 0..k {
            if h.gcd(&k) == 1 {
                v.push(FareyFrame::new(h, k)?);
            }
        }
    }
    Ok(v)
}

pub fn modular_points() -> (Vec<Complex64>, Vec<f64>) {
    (vec![Complex64::new(1.0, 0.0), Complex64::new(0.8, 0.3)], vec![0.1, -0.07])
}

pub fn decomposition_points() -> Vec<(f64, Complex64)> {
    vec![
        (0.1, Complex64::new(0.05, 0.35)),
        (0.0, Complex64::new(0.0, 0.4)),
        (0.23, Complex64::new(-0.2, 0.5)),
    ]
}

/// Theta/eta/C* transformations over the Farey grid, the triple product and
/// the rank generating function decomposition.
pub fn modular_suite(tol: f64) -> Result<ModularReport> {
    let mut raw: Vec<IdentityResidual> = Vec::new();
    let (zs, us) = modular_points();
    for f in farey_grid(MODULAR_K_MAX)? {
        for &z in &zs {
            for &u in &us {
                raw.extend(verify_jacobi_transforms(&f, z, u)?);
            }
        }
    }
    for a in 0..5 {
        for b in 0..5 {
            let u = Complex64::new(-0.4 + 0.2 * a as f64, 0.03 * b as f64);
            let tau = Complex64::new(0.1 * b as f64 - 0.2, 0.2 + 0.15 * a as f64);
            raw.push(IdentityResidual {
                identity: "theta_triple_product".into(),
                parameters: format!("u={u} tau={tau}"),
                residual: (eval_theta(u, tau)? - eval_theta_product(u, tau)?).norm(),
                mandatory: true,
            });
        }
    }
    let laws: Vec<_> = (0..=DECOMPOSITION_ORDER).map(rank_distribution).collect();
    for (u, tau) in decomposition_points() {
        raw.extend(verify_ou_decomposition(u, tau, &laws)?);
    }
    let results: Vec<ResidualRow> = raw
        .into_iter()
        .map(|r| ResidualRow {
            pass: r.passes(tol),
            identity: r.identity,
            parameters: r.parameters,
            residual: r.residual,
            mandatory: r.mandatory,
        })
        .collect();
    let mandatory: Vec<_> = results.iter().filter(|r| r.mandatory).collect();
    Ok(ModularReport {
        suite: "modular",
        tolerance: tol,
        pass: results.iter().all(|r| r.pass),
        mandatory_checks: mandatory.len(),
        max_mandatory_residual: mandatory.iter().map(|r| r.residual).fold(0.0, f64::max),
        results,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitsReport {
    pub suite: &'static str,
    pub pass: bool,
    pub config: LimitSuiteConfig,
    #[serde(flatten)]
    pub report: SuiteReport,
}

pub fn limits_suite(cfg: &LimitSuiteConfig) -> LimitsReport {
    let report = limit_suite(cfg);
    LimitsReport { suite: "limits", pass: report.passed(), config: cfg.clone(), report }
}
