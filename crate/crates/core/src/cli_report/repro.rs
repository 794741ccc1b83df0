//! Reproduction suites: each criterion evaluated against its oracle and
//! reported as measured vs expected rows.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::Suite;
use crate::embedding::{
    build_lattice, closure_scan, pythagoras_closure, Branch, DEFAULT_CLOSURE_TOL, DEFAULT_SOLVER_TOL,
};
use crate::error::Result;
use crate::expfam::{
    bregman_divergence, divergence, family_point, kl_oracle, moment_oracle, potential, three_term_divergence,
};
use crate::mellin_zeta::mellin_numeric;
use crate::numerics::{duplication_residual, gamma, QuadConfig};
use crate::spectral::{
    default_xi_max, gaussian_shape_residual, hy_ratio, jacobi_residual, poisson_residual, spectral_profile,
    ThetaConfig, DEFAULT_SAMPLE_COUNT, DEFAULT_TAIL_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// |measured − expected| ≤ tolerance.
    Within,
    /// measured ≤ expected + tolerance.
    AtMost,
    /// measured ≥ expected.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionRow {
    pub id: String,
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl CriterionRow {
    pub fn new(id: &str, name: impl Into<String>, measured: f64, expected: f64, tolerance: f64, relation: Relation) -> Self {
        let passed = match relation {
            Relation::Within => (measured - expected).abs() <= tolerance,
            Relation::AtMost => measured <= expected + tolerance,
            Relation::AtLeast => measured >= expected,
        };
        Self {
            id: id.to_string(),
            name: name.into(),
            measured,
            expected,
            tolerance,
            relation,
            passed,
        }
    }

    /// A nonnegative error that must not exceed `bound`.
    pub fn bounded(id: &str, name: impl Into<String>, error: f64, bound: f64) -> Self {
        Self::new(id, name, error, 0.0, bound, Relation::AtMost)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproResult {
    pub suite: Suite,
    pub rows: Vec<CriterionRow>,
    pub passed: bool,
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

pub fn criterion_geometry(quad: &QuadConfig) -> Result<Vec<CriterionRow>> {
    let (mut d1, mut d2, mut dm) = (0.0f64, 0.0f64, 0.0f64);
    for n in [2.0, 3.0] {
        for theta in [-0.5, -1.0, -2.0] {
            let p = family_point(n, theta)?;
            let psi = |t: f64| potential(n, t);
            let h1 = 1e-5;
            let eta_fd = (psi(theta + h1)? - psi(theta - h1)?) / (2.0 * h1);
            let h2 = 1e-4;
            let g_fd = (psi(theta + h2)? - 2.0 * psi(theta)? + psi(theta - h2)?) / (h2 * h2);
            d1 = d1.max((eta_fd - p.eta()).abs());
            d2 = d2.max((g_fd - p.g()).abs());
            dm = dm.max((moment_oracle(&p, quad)? - p.eta()).abs());
        }
    }
    let gauss = family_point(2.0, -1.0)?;
    Ok(vec![
        CriterionRow::bounded("1", "finite-difference psi' vs eta", d1, 1e-6),
        CriterionRow::bounded("1", "finite-difference psi'' vs g", d2, 1e-4),
        CriterionRow::bounded("1", "moment quadrature vs eta", dm, 1e-8),
        CriterionRow::new("1", "g at n=2 theta=-1", gauss.g(), 0.5, 0.0, Relation::Within),
        CriterionRow::new("1", "eta at n=2 theta=-1", gauss.eta(), 0.5, 0.0, Relation::Within),
    ])
}

pub fn criterion_divergence(seed: u64, quad: &QuadConfig) -> Result<Vec<CriterionRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for n in [2.0, 3.0] {
        let mut spread = 0.0f64;
        for _ in 0..20 {
            let theta = -rng.gen_range(0.2..3.0);
            let theta_ref = -rng.gen_range(0.2..3.0);
            let forms = [
                bregman_divergence(n, theta, theta_ref)?,
                three_term_divergence(n, theta, theta_ref)?,
                kl_oracle(n, theta, theta_ref, quad)?,
            ];
            let hi = forms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = forms.iter().copied().fold(f64::INFINITY, f64::min);
            spread = spread.max(hi - lo);
        }
        rows.push(CriterionRow::bounded(
            "2",
            format!("divergence forms agree, n={n}, 20 pairs"),
            spread,
            1e-7,
        ));
    }
    Ok(rows)
}

/// Root of t − ln t = 3 on t > 1 by plain bisection.
fn unit_ratio_oracle() -> f64 {
    let (mut lo, mut hi) = (1.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid - mid.ln() - 3.0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn criterion_embedding() -> Result<Vec<CriterionRow>> {
    let mut rows = Vec::new();
    for n in [2.0, 3.0] {
        let lattice = build_lattice(n, -1.0, 10, Branch::BelowReference, DEFAULT_SOLVER_TOL)?;
        let err = lattice
            .points
            .iter()
            .map(|p| divergence(n, p.theta, -1.0).map(|d| (d - (p.k as f64).powf(n)).abs()))
            .collect::<Result<Vec<_>>>()?;
        rows.push(CriterionRow::bounded(
            "3",
            format!("|D(theta_k||theta_0) - k^n|, n={n}, k=1..10"),
            max_of(err),
            1e-9,
        ));
    }
    let theta1 = build_lattice(2.0, -1.0, 1, Branch::BelowReference, DEFAULT_SOLVER_TOL)?.points[0].theta;
    rows.push(CriterionRow::new(
        "3",
        "theta_1 at n=2 vs bisection",
        theta1,
        -unit_ratio_oracle(),
        1e-8,
        Relation::Within,
    ));
    Ok(rows)
}

pub fn criterion_closure() -> Result<Vec<CriterionRow>> {
    let mut rows = Vec::new();
    for triple in [(3, 4, 5), (5, 12, 13), (8, 15, 17)] {
        let r = pythagoras_closure(2.0, -1.0, triple, Branch::BelowReference, DEFAULT_CLOSURE_TOL)?;
        rows.push(CriterionRow::new(
            "4",
            format!("defect n=2 {:?}", triple),
            r.defect,
            0.0,
            DEFAULT_CLOSURE_TOL,
            Relation::Within,
        ));
    }
    let r = pythagoras_closure(3.0, -1.0, (3, 4, 5), Branch::BelowReference, DEFAULT_CLOSURE_TOL)?;
    rows.push(CriterionRow::new("4", "defect n=3 (3, 4, 5)", r.defect, -34.0, DEFAULT_CLOSURE_TOL, Relation::Within));
    for n in [3.0, 4.0, 5.0] {
        let scan = closure_scan(n, -1.0, 60, Branch::BelowReference, DEFAULT_CLOSURE_TOL)?;
        rows.push(CriterionRow::new(
            "4",
            format!("closures with A,B,C <= 60, n={n}"),
            scan.closures.len() as f64,
            0.0,
            0.0,
            Relation::Within,
        ));
        if n == 3.0 {
            rows.push(CriterionRow::new(
                "4",
                format!("min |defect| n=3 at {:?}", scan.argmin),
                scan.min_abs_defect,
                1.0,
                DEFAULT_CLOSURE_TOL,
                Relation::Within,
            ));
        }
    }
    Ok(rows)
}

pub const POISSON_TAUS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

pub fn criterion_poisson(quad: &QuadConfig) -> Result<Vec<CriterionRow>> {
    let mut rows = Vec::new();
    for (n, bound) in [(2.0, 1e-10), (1.5, 1e-6), (3.0, 1e-6), (4.0, 1e-6)] {
        let residuals = POISSON_TAUS
            .iter()
            .map(|&tau| poisson_residual(&ThetaConfig::new(n, tau), quad).map(|r| r.residual))
            .collect::<Result<Vec<_>>>()?;
        rows.push(CriterionRow::bounded(
            "5",
            format!("Poisson residual n={n}, 5 taus"),
            max_of(residuals),
            bound,
        ));
    }
    Ok(rows)
}

/// 20 log-spaced points on [0.1, 10].
pub fn jacobi_grid() -> Vec<f64> {
    (0..20).map(|i| 0.1 * 100f64.powf(i as f64 / 19.0)).collect()
}

pub fn criterion_jacobi() -> Result<Vec<CriterionRow>> {
    let residuals = jacobi_grid()
        .into_iter()
        .map(|tau| jacobi_residual(tau, DEFAULT_TAIL_TOL))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        CriterionRow::bounded("6", "Jacobi residual, 20 taus in [0.1, 10]", max_of(residuals), 1e-9),
        CriterionRow::bounded(
            "6",
            "Jacobi residual at tau=pi",
            jacobi_residual(PI, DEFAULT_TAIL_TOL)?,
            8.0 * f64::EPSILON,
        ),
    ])
}

pub fn criterion_exponent(quad: &QuadConfig) -> Result<Vec<CriterionRow>> {
    let mut rows = Vec::new();
    for n in [2.0, 3.0, 4.0] {
        let profile = spectral_profile(n, default_xi_max(n), DEFAULT_SAMPLE_COUNT, quad)?;
        rows.push(CriterionRow::new(
            "7",
            format!("q_hat n={n}"),
            profile.q_hat,
            n / (n - 1.0),
            0.1,
            Relation::Within,
        ));
        let shape = gaussian_shape_residual(&profile.xi_samples);
        rows.push(if n == 2.0 {
            CriterionRow::bounded("7", "Gaussian shape residual n=2", shape, 1e-6)
        } else {
            CriterionRow::new("7", format!("Gaussian shape residual n={n}"), shape, 1e-2, 0.0, Relation::AtLeast)
        });
    }
    Ok(rows)
}

pub const HY_EXPONENTS: [f64; 4] = [1.25, 1.5, 1.75, 2.0];

pub fn criterion_beckner(quad: &QuadConfig) -> Result<Vec<CriterionRow>> {
    let mut excess = f64::NEG_INFINITY;
    let mut equality = 0.0f64;
    let mut gap = f64::NAN;
    for n in [1.5, 2.0, 3.0, 4.0] {
        for p in HY_EXPONENTS {
            let r = hy_ratio(n, p, quad)?;
            excess = excess.max(r.ratio - r.beckner_bound);
            if n == 2.0 && p < 2.0 {
                equality = equality.max((r.ratio - r.beckner_bound).abs());
            }
            if n == 3.0 && p == 1.5 {
                gap = r.beckner_bound - r.ratio;
            }
        }
    }
    Ok(vec![
        CriterionRow::new("8", "max(ratio - bound) over grid", excess, 0.0, 1e-4, Relation::AtMost),
        CriterionRow::bounded("8", "|ratio - bound| at n=2, p<2", equality, 1e-4),
        CriterionRow::new("8", "bound - ratio at n=3, p=1.5", gap, 1e-3, 0.0, Relation::AtLeast),
    ])
}

pub const MELLIN_S: [f64; 4] = [0.75, 1.0, 1.5, 2.0];

pub fn criterion_mellin(quad: &QuadConfig) -> Result<Vec<CriterionRow>> {
    let mut worst = 0.0f64;
    for n in [2.0, 3.0, 4.0] {
        for s in MELLIN_S.into_iter().filter(|&s| n * s > 1.0) {
            worst = worst.max(mellin_numeric(n, s, quad, 1e-15)?.residual);
        }
    }
    let spot = mellin_numeric(2.0, 1.0, quad, 1e-15)?;
    Ok(vec![
        CriterionRow::bounded("9", "Mellin residual over n x s grid", worst, 1e-6),
        CriterionRow::new("9", "Mellin n=2 s=1", spot.numeric, PI * PI / 3.0, 1e-6, Relation::Within),
    ])
}

pub fn criterion_special() -> Result<Vec<CriterionRow>> {
    let dup = (0..200)
        .map(|i| {
            let s = 0.1 + 19.9 * i as f64 / 199.0;
            Ok(duplication_residual(s)? / gamma(s)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        CriterionRow::new("10", "Gamma(1/2)", gamma(0.5)?, PI.sqrt(), 1e-12, Relation::Within),
        CriterionRow::bounded("10", "relative duplication residual, s in [0.1, 20]", max_of(dup), 1e-9),
    ])
}

pub fn run_suite(suite: Suite, seed: u64, quad: &QuadConfig) -> Result<ReproResult> {
    let mut rows = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Metric {
        rows.extend(criterion_geometry(quad)?);
        rows.extend(criterion_divergence(seed, quad)?);
        rows.extend(criterion_embedding()?);
    }
    if all || suite == Suite::Closure {
        rows.extend(criterion_closure()?);
    }
    if all || suite == Suite::Duality {
        rows.extend(criterion_poisson(quad)?);
        rows.extend(criterion_jacobi()?);
        rows.extend(criterion_exponent(quad)?);
        rows.extend(criterion_beckner(quad)?);
    }
    if all || suite == Suite::Mellin {
        rows.extend(criterion_mellin(quad)?);
        rows.extend(criterion_special()?);
    }
    let passed = rows.iter().all(|r| r.passed);
    Ok(ReproResult { suite, rows, passed })
}

/// Plain-text table of the rows.
pub fn format_table(result: &ReproResult) -> String {
    let mut out = format!(
        "{:<4} {:<48} {:>14} {:>14} {:>10} {:<8} {}\n",
        "id", "check", "measured", "expected", "tol", "rel", "status"
    );
    for r in &result.rows {
        let rel = match r.relation {
            Relation::Within => "within",
            Relation::AtMost => "at_most",
            Relation::AtLeast => "at_least",
        };
        out.push_str(&format!(
            "{:<4} {:<48} {:>14.6e} {:>14.6e} {:>10.1e} {:<8} {}\n",
            r.id,
            r.name,
            r.measured,
            r.expected,
            r.tolerance,
            rel,
            if r.passed { "PASS" } else { "FAIL" }
        ));
    }
    out
}
