//! Mellin transform of Θₙ(τ) − 1 and its zeta factorization
//! ∫₀^∞ (Θₙ(τ) − 1) τ^{s−1} dτ = 2Γ(s)ζ(ns), valid for s > 1/n.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::check_exponent;
use crate::numerics::{
    duplication_residual, gamma, integrate_halfline, integrate_interval, log_gamma, zeta_real,
    QuadConfig,
};
use crate::spectral::{asymptotic_coefficients, asymptotic_threshold, theta_minus_one, DEFAULT_TERM_CAP};

pub const SPLIT_POINT: f64 = 1.0;

fn check_strip(n: f64, s: f64) -> Result<()> {
    check_exponent(n)?;
    if !(s.is_finite() && n * s > 1.0) {
        return Err(Error::domain(format!("Mellin transform needs s > 1/n, got s={s}, n={n}")));
    }
    Ok(())
}

/// 2Γ(s)ζ(ns).
pub fn mellin_closed_form(n: f64, s: f64) -> Result<f64> {
    check_strip(n, s)?;
    Ok(2.0 * gamma(s)? * zeta_real(n * s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinReport {
    pub n: f64,
    pub s: f64,
    pub numeric: f64,
    pub closed_form: f64,
    pub residual: f64,
    pub split_point: f64,
    /// Below this τ the integral is taken from the small-τ expansion of Θₙ.
    pub expansion_cutoff: f64,
    pub quad_error: f64,
}

/// ∫₀^a (Θₙ(τ) − 1) τ^{s−1} dτ from
/// Θₙ(τ) = (2/n)Γ(1/n) τ^{−1/n} + 2Σ_j c_j ζ(e_j) τ^{(e_j−1)/n} + (exponentially small),
/// where c_j ξ^{−e_j} are the terms of the large-ξ expansion of the kernel transform.
fn small_tau_piece(n: f64, s: f64, a: f64) -> Result<f64> {
    let c0 = 2.0 / n * gamma(1.0 / n)?;
    let mut sum = c0 * a.powf(s - 1.0 / n) / (s - 1.0 / n) - a.powf(s) / s;
    for (exponent, coeff) in asymptotic_coefficients(n, 40) {
        let power = (exponent - 1.0) / n;
        let term = 2.0 * coeff * zeta_real(exponent)? * a.powf(s + power) / (s + power);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    Ok(sum)
}

/// Numerical Mellin transform of Θₙ − 1, split at τ = 1.
///
/// (0, a] uses the small-τ expansion with a = ξ₀^{−n}, where ξ₀ is the
/// crossover to the large-ξ kernel expansion; [a, 1] is integrated in ln τ;
/// [1, ∞) on the half-line where the integrand decays like e^{−τ}.
pub fn mellin_numeric(n: f64, s: f64, quad: &QuadConfig, tail_tol: f64) -> Result<MellinReport> {
    check_strip(n, s)?;
    quad.validate()?;
    if tail_tol.is_nan() || tail_tol <= 0.0 {
        return Err(Error::domain(format!("tail_tol must be positive, got {tail_tol}")));
    }
    let closed_form = mellin_closed_form(n, s)?;
    let theta1 = |tau: f64| theta_minus_one(n, tau, tail_tol, DEFAULT_TERM_CAP);

    let a = asymptotic_threshold(n).powf(-n);
    let near_zero = small_tau_piece(n, s, a)?;

    let middle = integrate_interval(
        |u| {
            let tau = u.exp();
            theta1(tau).map_or(f64::NAN, |t| t * (s * u).exp())
        },
        a.ln(),
        0.0,
        quad,
    )?;
    let tail = integrate_halfline(
        |x| {
            let tau = SPLIT_POINT + x;
            theta1(tau).map_or(f64::NAN, |t| t * tau.powf(s - 1.0))
        },
        quad,
    )?;

    let numeric = near_zero + middle.value + tail.value;
    Ok(MellinReport {
        n,
        s,
        numeric,
        closed_form,
        residual: (numeric - closed_form).abs(),
        split_point: SPLIT_POINT,
        expansion_cutoff: a,
        quad_error: middle.error_estimate + tail.error_estimate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFactorRow {
    pub s: f64,
    /// Γ(s)/Γ(s/n).
    pub ratio: f64,
    /// Relative residual of the duplication formula at s; n = 2 only.
    pub duplication_residual: Option<f64>,
}

pub fn gamma_factor_scan(n: f64, s_grid: &[f64]) -> Result<Vec<GammaFactorRow>> {
    check_exponent(n)?;
    if let Some(&bad) = s_grid.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::domain(format!("gamma factor scan needs s > 0, got {bad}")));
    }
    s_grid
        .par_iter()
        .map(|&s| {
            let ratio = (log_gamma(s)? - log_gamma(s / n)?).exp();
            let duplication = if n == 2.0 {
                Some(duplication_residual(s)? / gamma(s)?)
            } else {
                None
            };
            Ok(GammaFactorRow {
                s,
                ratio,
                duplication_residual: duplication,
            })
        })
        .collect()
}
