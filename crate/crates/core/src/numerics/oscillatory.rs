//! Cosine transform of the even kernel exp(−γ|x|ⁿ) by zero splitting.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::quad::{integrate_halfline, integrate_interval, QuadConfig, QuadResult};

/// Number of half-period terms between acceleration attempts.
const ACCELERATION_STRIDE: usize = 16;
/// Partial sums fed to the epsilon algorithm.
const ACCELERATION_WINDOW: usize = 24;

/// f̂(ξ) = 2∫₀^∞ exp(−γxⁿ) cos(2πξx) dx.
///
/// For ξ ≠ 0 the half-line is cut at the zeros of cos(2πξx). The first
/// quarter-period and every following half-period are integrated by
/// Gauss–Kronrod panels; the half-period integrals alternate in sign with
/// decreasing magnitude, so the series stops once a term is below tolerance.
/// If that takes long, the partial sums are accelerated with Wynn's epsilon
/// algorithm.
pub fn fourier_cosine_transform(n: f64, gamma: f64, xi: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    cfg.validate()?;
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::domain(format!("kernel exponent must satisfy n >= 1, got {n}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("kernel rate must be positive, got {gamma}")));
    }
    if !xi.is_finite() {
        return Err(Error::domain(format!("frequency must be finite, got {xi}")));
    }
    let kernel = move |x: f64| (-gamma * x.powf(n)).exp();
    let xi = xi.abs();
    if xi == 0.0 {
        return integrate_halfline(kernel, cfg).map(|r| r.scaled(2.0));
    }

    let omega = 2.0 * PI * xi;
    let quarter = 0.25 / xi;
    let half = 0.5 / xi;
    let panel_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / 64.0,
        rel_tol: cfg.rel_tol,
        ..*cfg
    };

    let first = integrate_interval(|x| kernel(x) * (omega * x).cos(), 0.0, quarter, &panel_cfg)?;
    let mut sum = 2.0 * first.value;
    let mut quad_error = 2.0 * first.error_estimate;
    let mut evaluations = first.evaluations;
    let mut partials = vec![sum];
    let mut last_accelerated: Option<f64> = None;

    for j in 1..=cfg.max_oscillation_terms {
        // [x_j, x_j + half] with x_j = (2j − 1)/(4ξ); there cos(2πξx) = (−1)^j sin(2πξu)
        let start = (2 * j - 1) as f64 * quarter;
        if kernel(start) == 0.0 {
            return Ok(QuadResult {
                value: sum,
                error_estimate: quad_error,
                evaluations,
                converged: true,
            });
        }
        let piece = integrate_interval(
            |u| kernel(start + u) * (omega * u).sin(),
            0.0,
            half,
            &panel_cfg,
        )?;
        let sign = if j % 2 == 0 { 2.0 } else { -2.0 };
        let term = sign * piece.value;
        sum += term;
        quad_error += 2.0 * piece.error_estimate;
        evaluations += piece.evaluations;
        partials.push(sum);

        let tol = cfg.tolerance_for(sum);
        // alternating with non-increasing magnitude: the remainder is below |term|
        if term.abs() + quad_error <= tol {
            return Ok(QuadResult {
                value: sum,
                error_estimate: term.abs() + quad_error,
                evaluations,
                converged: true,
            });
        }

        if j >= ACCELERATION_STRIDE && j % ACCELERATION_STRIDE == 0 {
            let window = &partials[partials.len().saturating_sub(ACCELERATION_WINDOW)..];
            if let Some(accelerated) = wynn_epsilon(window) {
                if let Some(previous) = last_accelerated {
                    let change = (accelerated - previous).abs();
                    if change + quad_error <= cfg.tolerance_for(accelerated) {
                        return Ok(QuadResult {
                            value: accelerated,
                            error_estimate: change + quad_error,
                            evaluations,
                            converged: true,
                        });
                    }
                }
                last_accelerated = Some(accelerated);
            }
        }
    }
    Err(Error::NonConvergence {
        routine: "fourier_cosine_transform",
        error_estimate: partials
            .windows(2)
            .last()
            .map_or(f64::INFINITY, |w| (w[1] - w[0]).abs()),
        tolerance: cfg.tolerance_for(sum),
        evaluations,
    })
}

/// Wynn's epsilon algorithm; returns the highest even-column estimate.
pub(crate) fn wynn_epsilon(partials: &[f64]) -> Option<f64> {
    let m = partials.len();
    let mut best = *partials.last()?;
    let mut previous = vec![0.0; m];
    let mut current = partials.to_vec();
    for k in 1..m {
        let len = current.len() - 1;
        let mut next = Vec::with_capacity(len);
        for i in 0..len {
            let d = current[i + 1] - current[i];
            if d == 0.0 || !d.is_finite() {
                return Some(best);
            }
            next.push(previous[i + 1] + 1.0 / d);
        }
        previous = current;
        current = next;
        if k % 2 == 0 {
            if let Some(&v) = current.last() {
                if v.is_finite() {
                    best = v;
                }
            }
        }
        if current.len() < 2 {
            break;
        }
    }
    Some(best)
}
