//! Theta series of the kernel exp(−|x|ⁿ) on ℤ, its Poisson dual, and the
//! Fourier decay of the kernel.
//!
//! Fourier convention: f̂(ξ) = ∫ f(x) e^{−2πiξx} dx, so for the even kernel
//! f̂(ξ) = 2∫₀^∞ exp(−xⁿ) cos(2πξx) dx and Poisson summation reads
//! Θₙ(τ) = τ^{−1/n} Σ_m f̂(m τ^{−1/n}).
//!
//! Unless n is an even integer the kernel is not smooth at the origin and
//! f̂ has the algebraic expansion
//! f̂(ξ) ~ Σ_{j≥1} (−1)ʲ/j! · 2Γ(nj+1) cos(π(nj+1)/2) / (2πξ)^{nj+1},
//! which dominates once ξ is moderately large. The dual sum uses it to close
//! the m-series analytically through Hurwitz zeta values.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::check_exponent;
use crate::numerics::special::ln_gamma_positive;
use crate::numerics::{
    fourier_cosine_transform, gamma, hurwitz_zeta, integrate_halfline, integrate_interval,
    QuadConfig,
};

pub const DEFAULT_TAIL_TOL: f64 = 1e-14;
pub const DEFAULT_TERM_CAP: usize = 10_000_000;
pub const DEFAULT_SAMPLE_COUNT: usize = 512;
/// Minimum number of envelope points needed for the decay fit.
pub const MIN_ENVELOPE_POINTS: usize = 5;

/// Default ξ range for the decay profile.
pub fn default_xi_max(n: f64) -> f64 {
    if n == 2.0 {
        3.0
    } else {
        5.0
    }
}

pub(crate) fn is_even_integer(n: f64) -> bool {
    n.fract() == 0.0 && (n as i64) % 2 == 0
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("tau must be positive, got {tau}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaConfig {
    pub n: f64,
    pub tau: f64,
    pub tail_tol: f64,
    pub max_terms: usize,
}

impl ThetaConfig {
    pub fn new(n: f64, tau: f64) -> Self {
        Self {
            n,
            tau,
            tail_tol: DEFAULT_TAIL_TOL,
            max_terms: DEFAULT_TERM_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.n)?;
        check_tau(self.tau)?;
        if self.tail_tol.is_nan() || self.tail_tol <= 0.0 {
            return Err(Error::domain(format!("tail_tol must be positive, got {}", self.tail_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSum {
    pub value: f64,
    /// Largest |k| included.
    pub terms_used: usize,
}

/// 2·exp(−τKⁿ)/(1 − exp(−τ((K+1)ⁿ − Kⁿ))), a bound on 2Σ_{k≥K} exp(−τkⁿ).
fn tail_bound(n: f64, tau: f64, k: f64) -> f64 {
    let gap = tau * ((k + 1.0).powf(n) - k.powf(n));
    2.0 * (-tau * k.powf(n)).exp() / -(-gap).exp_m1()
}

/// Θₙ(τ) = Σ_{k∈ℤ} exp(−τ|k|ⁿ).
pub fn theta_series(cfg: &ThetaConfig) -> Result<ThetaSum> {
    cfg.validate()?;
    let (n, tau) = (cfg.n, cfg.tau);
    let guess = ((2.0 / cfg.tail_tol).ln().max(0.0) / tau).powf(1.0 / n).ceil().max(1.0);
    if guess > cfg.max_terms as f64 {
        return Err(Error::TermCap { required: guess, cap: cfg.max_terms });
    }
    let mut k = guess;
    while k > 1.0 && tail_bound(n, tau, k - 1.0) < cfg.tail_tol {
        k -= 1.0;
    }
    while tail_bound(n, tau, k) >= cfg.tail_tol {
        k += 1.0;
        if k > cfg.max_terms as f64 {
            return Err(Error::TermCap { required: k, cap: cfg.max_terms });
        }
    }
    let terms = k as usize;
    let mut sum = 0.0;
    for j in (1..=terms).rev() {
        sum += (-tau * (j as f64).powf(n)).exp();
    }
    Ok(ThetaSum {
        value: 1.0 + 2.0 * sum,
        terms_used: terms,
    })
}

/// Θₙ(τ) − 1 = 2Σ_{k≥1} exp(−τkⁿ), truncated when the remainder is below
/// `rel_tol` times the leading term. Keeps full relative precision for large τ.
pub fn theta_minus_one(n: f64, tau: f64, rel_tol: f64, max_terms: usize) -> Result<f64> {
    check_exponent(n)?;
    check_tau(tau)?;
    let lead = (-tau).exp();
    if lead == 0.0 {
        return Ok(0.0);
    }
    // remainder after K relative to the k = 1 term
    let relative_tail = |k: f64| {
        let gap = tau * ((k + 2.0).powf(n) - (k + 1.0).powf(n));
        (-tau * ((k + 1.0).powf(n) - 1.0)).exp() / -(-gap).exp_m1()
    };
    let mut k = (1.0 + (1.0 / rel_tol).ln().max(0.0) / tau).powf(1.0 / n).ceil().max(1.0);
    if k > max_terms as f64 {
        return Err(Error::TermCap { required: k, cap: max_terms });
    }
    while k > 1.0 && relative_tail(k - 1.0) < rel_tol {
        k -= 1.0;
    }
    while relative_tail(k) >= rel_tol {
        k += 1.0;
        if k > max_terms as f64 {
            return Err(Error::TermCap { required: k, cap: max_terms });
        }
    }
    let mut sum = 0.0;
    for j in (1..=k as usize).rev() {
        sum += (-tau * (j as f64).powf(n)).exp();
    }
    Ok(2.0 * sum)
}

/// How a value of f̂ was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformRoute {
    /// n = 2: √π·exp(−π²ξ²).
    GaussianClosedForm,
    /// Zero-splitting oscillatory quadrature.
    Oscillatory,
    /// Algebraic large-ξ expansion (n not an even integer).
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformValue {
    pub value: f64,
    pub error: f64,
    pub route: TransformRoute,
}

/// (exponent nj+1, coefficient) pairs of the algebraic expansion, in the
/// scaled variable 2πξ folded into the coefficient. Empty for even integer n.
pub fn asymptotic_coefficients(n: f64, max_terms: usize) -> Vec<(f64, f64)> {
    if is_even_integer(n) {
        return Vec::new();
    }
    let ln_two_pi = (2.0 * PI).ln();
    let mut out = Vec::new();
    let mut ln_factorial = 0.0;
    for j in 1..=max_terms {
        ln_factorial += (j as f64).ln();
        let nj = n * j as f64;
        // cos(π(nj+1)/2) = −sin(π·nj/2), reduced mod 2 for accuracy
        let phase = (0.5 * nj).rem_euclid(2.0);
        let trig = -(PI * phase).sin();
        if trig.abs() < 1e-14 {
            continue;
        }
        let exponent = nj + 1.0;
        let magnitude = (std::f64::consts::LN_2 + ln_gamma_positive(nj + 1.0) - ln_factorial
            - exponent * ln_two_pi)
            .exp();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        out.push((exponent, sign * trig * magnitude));
    }
    out
}

const ASYMPTOTIC_TERMS: usize = 40;

/// Sum of the algebraic expansion at ξ > 0.
pub fn asymptotic_transform(n: f64, xi: f64) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for (exponent, coeff) in asymptotic_coefficients(n, ASYMPTOTIC_TERMS) {
        let term = coeff * xi.powf(-exponent);
        if term.abs() > last {
            break; // divergent part of the expansion
        }
        sum += term;
        last = term.abs();
        if last < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Estimated −ln|f̂(ξ)| from the saddle point of exp(−xⁿ − 2πiξx), n ≥ 2.
pub fn saddle_decay(n: f64, xi: f64) -> f64 {
    let r = (2.0 * PI * xi / n).powf(1.0 / (n - 1.0));
    (n - 1.0) * r.powf(n) * (PI / (2.0 * (n - 1.0))).sin()
}

/// ξ from which the algebraic expansion replaces quadrature.
pub fn asymptotic_threshold(n: f64) -> f64 {
    if n < 2.0 {
        return 8.0;
    }
    let s = (n - 1.0) * (PI / (2.0 * (n - 1.0))).sin();
    let xi = n / (2.0 * PI) * (40.0 / s).powf((n - 1.0) / n);
    xi.max(8.0)
}

/// Smallest ξ with saddle decay above `nats` (n ≥ 2).
fn decay_cutoff(n: f64, nats: f64) -> f64 {
    let s = (n - 1.0) * (PI / (2.0 * (n - 1.0))).sin();
    n / (2.0 * PI) * (nats / s).powf((n - 1.0) / n)
}

/// f̂(ξ) for the unit-rate kernel exp(−|x|ⁿ), routed by n and ξ.
pub fn kernel_transform(n: f64, xi: f64, quad: &QuadConfig) -> Result<TransformValue> {
    check_exponent(n)?;
    let xi = xi.abs();
    if n == 2.0 {
        return Ok(TransformValue {
            value: PI.sqrt() * (-PI * PI * xi * xi).exp(),
            error: 0.0,
            route: TransformRoute::GaussianClosedForm,
        });
    }
    if !is_even_integer(n) && xi >= asymptotic_threshold(n) {
        return Ok(TransformValue {
            value: asymptotic_transform(n, xi),
            error: 0.0,
            route: TransformRoute::Asymptotic,
        });
    }
    let r = fourier_cosine_transform(n, 1.0, xi, quad)?;
    Ok(TransformValue {
        value: r.value,
        error: r.error_estimate,
        route: TransformRoute::Oscillatory,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualSum {
    pub value: f64,
    /// Largest |m| evaluated explicitly.
    pub terms_used: usize,
    pub quad_error: f64,
    /// True when f̂ came from the Gaussian closed form.
    pub closed_form: bool,
    /// Analytic contribution of |m| > terms_used (algebraic tail), already in `value`.
    pub tail_correction: f64,
}

/// τ^{−1/n} Σ_m f̂(m τ^{−1/n}).
pub fn dual_theta_sum(cfg: &ThetaConfig, quad: &QuadConfig) -> Result<DualSum> {
    cfg.validate()?;
    quad.validate()?;
    let n = cfg.n;
    let h = cfg.tau.powf(-1.0 / n);
    let centre = kernel_transform(n, 0.0, quad)?;
    let closed_form = centre.route == TransformRoute::GaussianClosedForm;

    let coefficients = asymptotic_coefficients(n, ASYMPTOTIC_TERMS);
    let last_m = if coefficients.is_empty() {
        // super-exponential decay: stop where the envelope is far below tail_tol
        let nats = (10.0 * h / cfg.tail_tol).ln() + 5.0;
        let cutoff = if n == 2.0 { (nats / (PI * PI)).sqrt() } else { decay_cutoff(n, nats) };
        (cutoff / h).ceil().max(1.0) as usize
    } else {
        (asymptotic_threshold(n) / h).ceil().max(1.0) as usize
    };
    if last_m > cfg.max_terms {
        return Err(Error::TermCap { required: last_m as f64, cap: cfg.max_terms });
    }

    let samples = (1..=last_m)
        .into_par_iter()
        .map(|m| kernel_transform(n, m as f64 * h, quad))
        .collect::<Result<Vec<_>>>()?;
    let mut sum = 0.0;
    let mut quad_error = centre.error;
    for s in samples.iter().rev() {
        sum += s.value;
        quad_error += 2.0 * s.error;
    }

    // Σ_{m>M} f̂(mh) ≈ Σ_j c_j h^{−e_j} ζ(e_j, M+1)
    let mut tail = 0.0;
    for &(exponent, coeff) in &coefficients {
        let term = coeff * h.powf(-exponent) * hurwitz_zeta(exponent, last_m as f64 + 1.0)?;
        tail += term;
        if term.abs() < 1e-18 * tail.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }

    Ok(DualSum {
        value: h * (centre.value + 2.0 * sum + 2.0 * tail),
        terms_used: last_m,
        quad_error: h * quad_error,
        closed_form,
        tail_correction: 2.0 * h * tail,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport {
    pub n: f64,
    pub tau: f64,
    pub primal_sum: f64,
    pub dual_sum: f64,
    pub residual: f64,
    pub primal_terms: usize,
    pub dual_terms: usize,
    pub quad_error: f64,
    /// Truncation of both sums plus quadrature error plus rounding.
    pub error_budget: f64,
    pub closed_form_dual: bool,
    pub tail_correction: f64,
}

impl PoissonReport {
    pub fn within_budget(&self) -> bool {
        self.residual <= self.error_budget
    }
}

pub fn poisson_residual(cfg: &ThetaConfig, quad: &QuadConfig) -> Result<PoissonReport> {
    let primal = theta_series(cfg)?;
    let dual = dual_theta_sum(cfg, quad)?;
    let rounding = 64.0 * f64::EPSILON * primal.value.abs().max(dual.value.abs());
    Ok(PoissonReport {
        n: cfg.n,
        tau: cfg.tau,
        primal_sum: primal.value,
        dual_sum: dual.value,
        residual: (primal.value - dual.value).abs(),
        primal_terms: primal.terms_used,
        dual_terms: dual.terms_used,
        quad_error: dual.quad_error,
        error_budget: 2.0 * cfg.tail_tol + dual.quad_error + rounding,
        closed_form_dual: dual.closed_form,
        tail_correction: dual.tail_correction,
    })
}

/// |Θ₂(τ) − √(π/τ)·Θ₂(π²/τ)|.
pub fn jacobi_residual(tau: f64, tail_tol: f64) -> Result<f64> {
    check_tau(tau)?;
    let cfg = |t: f64| ThetaConfig {
        tail_tol,
        ..ThetaConfig::new(2.0, t)
    };
    let lhs = theta_series(&cfg(tau))?.value;
    let rhs = (PI / tau).sqrt() * theta_series(&cfg(PI * PI / tau))?.value;
    Ok((lhs - rhs).abs())
}

/// n/(n − 1).
pub fn conjugate_exponent(n: f64) -> Result<f64> {
    if !(n > 1.0 && n.is_finite()) {
        return Err(Error::domain(format!("conjugate exponent needs n > 1, got {n}")));
    }
    Ok(n / (n - 1.0))
}

/// Sampled f̂ with the fitted decay law |f̂| ≈ C·exp(−γ̂ ξ^q̂).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub n: f64,
    pub xi_max: f64,
    pub route: TransformRoute,
    pub xi_samples: Vec<(f64, f64)>,
    /// Envelope points inside the fitting window.
    pub envelope_points: Vec<(f64, f64)>,
    /// Whether f̂ changes sign inside the fitting window.
    pub sign_oscillation: bool,
    pub q_hat: f64,
    pub gamma_hat: f64,
    pub fit_residual: f64,
}

/// Least-squares line y = a + b·x; returns (a, b, rms).
pub(crate) fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let len = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
    let my = points.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / len)
        .sqrt();
    (intercept, slope, rms)
}

/// Samples f̂ on a uniform grid over [0, xi_max] and fits ln(−ln env) against
/// ln ξ on the upper half of the range.
///
/// The envelope is the set of local maxima of |f̂| when f̂ changes sign in the
/// window, and |f̂| itself otherwise.
pub fn spectral_profile(n: f64, xi_max: f64, sample_count: usize, quad: &QuadConfig) -> Result<SpectralProfile> {
    check_exponent(n)?;
    if !(xi_max > 0.0 && xi_max.is_finite()) {
        return Err(Error::domain(format!("xi_max must be positive, got {xi_max}")));
    }
    if sample_count < 16 {
        return Err(Error::domain(format!("sample_count must be at least 16, got {sample_count}")));
    }
    quad.validate()?;
    let step = xi_max / (sample_count - 1) as f64;
    let values = (0..sample_count)
        .into_par_iter()
        .map(|i| {
            let xi = i as f64 * step;
            let v = if n == 2.0 {
                kernel_transform(n, xi, quad)?
            } else {
                let r = fourier_cosine_transform(n, 1.0, xi, quad)?;
                TransformValue {
                    value: r.value,
                    error: r.error_estimate,
                    route: TransformRoute::Oscillatory,
                }
            };
            Ok((xi, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let route = values[0].1.route;
    let xi_samples: Vec<(f64, f64)> = values.iter().map(|(xi, v)| (*xi, v.value)).collect();

    let window_start = 0.5 * xi_max;
    let first = xi_samples.iter().position(|s| s.0 >= window_start).unwrap_or(0);
    let window = &xi_samples[first..];
    let signs: Vec<f64> = window.iter().filter(|s| s.1 != 0.0).map(|s| s.1.signum()).collect();
    let sign_oscillation = signs.windows(2).any(|w| w[0] != w[1]);

    let envelope_points: Vec<(f64, f64)> = if sign_oscillation {
        (first.max(1)..xi_samples.len() - 1)
            .filter(|&i| {
                let here = xi_samples[i].1.abs();
                here > xi_samples[i - 1].1.abs() && here >= xi_samples[i + 1].1.abs()
            })
            .map(|i| (xi_samples[i].0, xi_samples[i].1.abs()))
            .collect()
    } else {
        window.iter().map(|s| (s.0, s.1.abs())).collect()
    };
    let fit_points: Vec<(f64, f64)> = envelope_points
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0 && p.1 < 1.0)
        .map(|p| (p.0.ln(), (-p.1.ln()).ln()))
        .collect();
    if fit_points.len() < MIN_ENVELOPE_POINTS {
        return Err(Error::InsufficientEnvelope {
            found: fit_points.len(),
            required: MIN_ENVELOPE_POINTS,
        });
    }
    let (intercept, slope, rms) = linear_fit(&fit_points);
    Ok(SpectralProfile {
        n,
        xi_max,
        route,
        xi_samples,
        envelope_points,
        sign_oscillation,
        q_hat: slope,
        gamma_hat: intercept.exp(),
        fit_residual: rms,
    })
}

/// Relative L² distance between sampled f̂ and the Gaussian a·exp(−bξ²)
/// fitted to ln f̂ where f̂ exceeds 10⁻³·f̂(0).
pub fn gaussian_shape_residual(samples: &[(f64, f64)]) -> f64 {
    let peak = samples.first().map_or(0.0, |s| s.1);
    let fit_points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.1 > 1e-3 * peak)
        .map(|s| (s.0 * s.0, s.1.ln()))
        .collect();
    if fit_points.len() < 2 || peak <= 0.0 {
        return f64::INFINITY;
    }
    let (ln_a, neg_b, _) = linear_fit(&fit_points);
    let (num, den) = samples.iter().fold((0.0, 0.0), |(num, den), s| {
        let model = (ln_a + neg_b * s.0 * s.0).exp();
        (num + (s.1 - model).powi(2), den + s.1 * s.1)
    });
    (num / den).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyRatio {
    pub n: f64,
    pub p: f64,
    pub p_conjugate: f64,
    pub f_norm: f64,
    pub fhat_norm: f64,
    pub ratio: f64,
    pub beckner_bound: f64,
}

/// ‖f̂‖_{p′}/‖f‖_p for f = exp(−|x|ⁿ), against the sharp Beckner constant.
pub fn hy_ratio(n: f64, p: f64, quad: &QuadConfig) -> Result<HyRatio> {
    check_exponent(n)?;
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::domain(format!("p must lie in (1, 2], got {p}")));
    }
    quad.validate()?;
    let pc = p / (p - 1.0);
    let f_norm = ((2.0 / n) * gamma(1.0 / n)? * p.powf(-1.0 / n)).powf(1.0 / p);

    let power = |v: f64| v.abs().powf(pc);
    let half_integral = if n == 2.0 {
        integrate_halfline(|xi| power(PI.sqrt() * (-PI * PI * xi * xi).exp()), quad)?.value
    } else {
        let cutoff = if is_even_integer(n) {
            decay_cutoff(n, 50.0 / pc)
        } else {
            asymptotic_threshold(n)
        };
        let body = integrate_interval(
            |xi| match kernel_transform(n, xi, quad) {
                Ok(v) => power(v.value),
                Err(_) => f64::NAN,
            },
            0.0,
            cutoff,
            quad,
        )?;
        let tail = if is_even_integer(n) {
            0.0
        } else {
            // ξ = cutoff/u maps [cutoff, ∞) onto (0, 1]
            integrate_interval(
                |u| power(asymptotic_transform(n, cutoff / u)) * cutoff / (u * u),
                0.0,
                1.0,
                quad,
            )?
            .value
        };
        body.value + tail
    };
    let fhat_norm = (2.0 * half_integral).powf(1.0 / pc);
    Ok(HyRatio {
        n,
        p,
        p_conjugate: pc,
        f_norm,
        fhat_norm,
        ratio: fhat_norm / f_norm,
        beckner_bound: (p.powf(1.0 / p) / pc.powf(1.0 / pc)).sqrt(),
    })
}
