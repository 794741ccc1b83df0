//! Closed-form geometry of the family p(x; θ) = exp(θ|x|ⁿ − ψ(θ)), θ < 0.
//!
//! The partition function is Z(θ) = (2/n)(−θ)^{−1/n} Γ(1/n), so the potential
//! is ψ(θ) = −(1/n) ln(−θ) + Cₙ with Cₙ = ln(2Γ(1/n)/n). Everything else
//! (expectation coordinate, Fisher metric, cubic form, dual potential,
//! canonical divergence) follows from ψ by differentiation or Legendre
//! transform. The `*_oracle` functions recompute the same quantities by
//! quadrature over the density.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::ln_gamma_positive;
use crate::numerics::{integrate_halfline, QuadConfig};

pub(crate) fn check_exponent(n: f64) -> Result<()> {
    if n >= 1.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("moment exponent must satisfy n >= 1, got {n}")))
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta < 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("natural parameter must be negative, got {theta}")))
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("expectation parameter must be positive, got {eta}")))
    }
}

/// Cₙ = ln(2Γ(1/n)/n), the potential at θ = −1.
pub fn potential_offset(n: f64) -> Result<f64> {
    check_exponent(n)?;
    Ok(std::f64::consts::LN_2 + ln_gamma_positive(1.0 / n) - n.ln())
}

/// ψ(θ) = −(1/n) ln(−θ) + Cₙ.
pub fn potential(n: f64, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(-(-theta).ln() / n + potential_offset(n)?)
}

/// A point of the one-dimensional family with its derived coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyPoint {
    n: f64,
    theta: f64,
    z: f64,
    psi: f64,
    eta: f64,
    g: f64,
}

impl FamilyPoint {
    pub fn n(&self) -> f64 {
        self.n
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    /// Partition function Z = exp(ψ).
    pub fn z(&self) -> f64 {
        self.z
    }
    pub fn psi(&self) -> f64 {
        self.psi
    }
    /// η = E|X|ⁿ = ψ'(θ).
    pub fn eta(&self) -> f64 {
        self.eta
    }
    /// Fisher metric g = ψ''(θ).
    pub fn g(&self) -> f64 {
        self.g
    }
}

pub fn family_point(n: f64, theta: f64) -> Result<FamilyPoint> {
    check_exponent(n)?;
    check_theta(theta)?;
    let psi = potential(n, theta)?;
    Ok(FamilyPoint {
        n,
        theta,
        z: psi.exp(),
        psi,
        eta: -1.0 / (n * theta),
        g: 1.0 / (n * theta * theta),
    })
}

/// Density exp(θ|x|ⁿ − ψ).
pub fn pdf(p: &FamilyPoint, x: f64) -> f64 {
    (p.theta * x.abs().powf(p.n) - p.psi).exp()
}

/// ∫ p(x) dx by quadrature (even symmetry, twice the half-line).
pub fn normalization_oracle(p: &FamilyPoint, cfg: &QuadConfig) -> Result<f64> {
    let r = integrate_halfline(|x| pdf(p, x), cfg)?;
    Ok(2.0 * r.value)
}

/// E|X|ⁿ by quadrature; agrees with [`FamilyPoint::eta`].
pub fn moment_oracle(p: &FamilyPoint, cfg: &QuadConfig) -> Result<f64> {
    let r = integrate_halfline(|x| x.powf(p.n) * pdf(p, x), cfg)?;
    Ok(2.0 * r.value)
}

/// θ = −1/(nη), the inverse Legendre map.
pub fn legendre_inverse(n: f64, eta: f64) -> Result<f64> {
    check_exponent(n)?;
    check_eta(eta)?;
    Ok(-1.0 / (n * eta))
}

/// Dual potential ψ*(η) = −1/n − (1/n) ln(nη) − Cₙ.
pub fn fenchel_conjugate(n: f64, eta: f64) -> Result<f64> {
    check_exponent(n)?;
    check_eta(eta)?;
    Ok(-1.0 / n - (n * eta).ln() / n - potential_offset(n)?)
}

/// Canonical divergence D(θ‖θ_ref) = (1/n)(ln(θ_ref/θ) + θ/θ_ref − 1).
///
/// `theta_ref` is the reference point: this is the Bregman divergence of ψ
/// taken at θ_ref.
pub fn divergence(n: f64, theta: f64, theta_ref: f64) -> Result<f64> {
    check_exponent(n)?;
    check_theta(theta)?;
    check_theta(theta_ref)?;
    let r = theta / theta_ref;
    let d = r - 1.0;
    // ln_1p near r = 1, plain ln where forming 1 + d would round away digits
    let ln_r = if d.abs() < 0.5 { d.ln_1p() } else { r.ln() };
    Ok((d - ln_r) / n)
}

/// ψ(θ) − ψ(θ′) − η(θ′)(θ − θ′), built from the potential directly.
pub fn bregman_divergence(n: f64, theta: f64, theta_ref: f64) -> Result<f64> {
    let p = family_point(n, theta)?;
    let q = family_point(n, theta_ref)?;
    Ok(p.psi - q.psi - q.eta * (theta - theta_ref))
}

/// ψ(θ) + ψ*(η′) − θη′ with η′ = η(θ_ref).
pub fn three_term_divergence(n: f64, theta: f64, theta_ref: f64) -> Result<f64> {
    let p = family_point(n, theta)?;
    let eta_ref = family_point(n, theta_ref)?.eta;
    Ok(p.psi + fenchel_conjugate(n, eta_ref)? - theta * eta_ref)
}

/// KL(p_θ_ref ‖ p_θ) = ∫ p_θ_ref ln(p_θ_ref / p_θ) dx by quadrature.
///
/// With θ_ref as the reference point of the Bregman divergence, the
/// reference density is the first argument of the KL divergence, so this
/// reproduces [`divergence`]`(n, theta, theta_ref)`.
pub fn kl_oracle(n: f64, theta: f64, theta_ref: f64, cfg: &QuadConfig) -> Result<f64> {
    let p = family_point(n, theta)?;
    let q = family_point(n, theta_ref)?;
    let r = integrate_halfline(
        |x| {
            let xn = x.powf(n);
            pdf(&q, x) * ((theta_ref - theta) * xn - q.psi + p.psi)
        },
        cfg,
    )?;
    Ok(2.0 * r.value)
}

/// ψ'''(θ) = −2/(nθ³), strictly positive on the whole domain.
pub fn cubic_form(n: f64, theta: f64) -> Result<f64> {
    check_exponent(n)?;
    check_theta(theta)?;
    Ok(-2.0 / (n * theta * theta * theta))
}

/// A point (θ₁, θ₂) on the product of two copies of the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub n: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl ProductPoint {
    pub fn new(n: f64, theta1: f64, theta2: f64) -> Result<Self> {
        check_exponent(n)?;
        check_theta(theta1)?;
        check_theta(theta2)?;
        Ok(Self { n, theta1, theta2 })
    }

    /// Ψ = ψ(θ₁) + ψ(θ₂).
    pub fn potential(&self) -> Result<f64> {
        Ok(potential(self.n, self.theta1)? + potential(self.n, self.theta2)?)
    }

    /// The diagonal Fisher metric diag(1/(nθ₁²), 1/(nθ₂²)).
    pub fn metric(&self) -> [[f64; 2]; 2] {
        let n = self.n;
        [
            [1.0 / (n * self.theta1 * self.theta1), 0.0],
            [0.0, 1.0 / (n * self.theta2 * self.theta2)],
        ]
    }
}

/// D(a‖b) on the product manifold: the sum of the component divergences.
pub fn product_divergence(n: f64, a: &ProductPoint, b: &ProductPoint) -> Result<f64> {
    if a.n != n || b.n != n {
        return Err(Error::domain(format!(
            "product points carry exponents {} and {}, expected {n}",
            a.n, b.n
        )));
    }
    Ok(divergence(n, a.theta1, b.theta1)? + divergence(n, a.theta2, b.theta2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn family_point_examples() {
        let p = family_point(2.0, -1.0).unwrap();
        assert_eq!(p.g(), 0.5);
        assert_eq!(p.eta(), 0.5);
        assert!(close(p.psi(), 0.5 * PI.ln(), 1e-13));
        assert!(close(p.z(), PI.sqrt(), 1e-13));

        let p = family_point(3.0, -2.0).unwrap();
        assert!(close(p.eta(), 1.0 / 6.0, 1e-15));
        assert!(close(p.g(), 1.0 / 12.0, 1e-15));
    }

    #[test]
    fn family_point_domain() {
        assert!(family_point(2.0, 0.0).is_err());
        assert!(family_point(2.0, 1.0).is_err());
        assert!(family_point(0.9, -1.0).is_err());
        assert!(family_point(f64::NAN, -1.0).is_err());
    }

    #[test]
    fn pdf_examples() {
        let p = family_point(2.0, -1.0).unwrap();
        assert!(close(pdf(&p, 0.0), 1.0 / PI.sqrt(), 1e-14));
        assert_eq!(pdf(&p, 1e6), 0.0);
        assert_eq!(pdf(&p, -1e6), 0.0);
        let p = family_point(1.0, -1.0).unwrap();
        assert!(close(pdf(&p, 1.0), (-1.0f64).exp() / 2.0, 1e-14));
        assert!(close(pdf(&p, -1.0), (-1.0f64).exp() / 2.0, 1e-14));
    }

    #[test]
    fn moment_oracle_examples() {
        let cfg = QuadConfig::default();
        for &(n, theta, eta) in &[(2.0, -1.0, 0.5), (2.0, -0.5, 1.0), (4.0, -1.0, 0.25)] {
            let p = family_point(n, theta).unwrap();
            assert!(close(moment_oracle(&p, &cfg).unwrap(), eta, 1e-8));
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_inverse(2.0, 0.5).unwrap(), -1.0);
        assert_eq!(legendre_inverse(3.0, 1.0 / 3.0).unwrap(), -1.0);
        assert_eq!(legendre_inverse(2.0, 1.0).unwrap(), -0.5);
        assert!(legendre_inverse(2.0, 0.0).is_err());
    }

    /// sup over θ on a log-spaced grid in [−10⁴, −10⁻⁴], refined by golden section.
    fn grid_sup(n: f64, eta: f64) -> f64 {
        let objective = |theta: f64| theta * eta - potential(n, theta).unwrap();
        let mut best = (f64::NEG_INFINITY, 0.0);
        let steps = 20_000;
        for i in 0..=steps {
            let theta = -(10f64).powf(-4.0 + 8.0 * i as f64 / steps as f64);
            let v = objective(theta);
            if v > best.0 {
                best = (v, theta);
            }
        }
        let (mut a, mut b) = (best.1 * 1.01, best.1 * 0.99);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if objective(c) > objective(d) {
                b = d;
            } else {
                a = c;
            }
        }
        objective(0.5 * (a + b))
    }

    #[test]
    fn fenchel_examples() {
        let v = fenchel_conjugate(2.0, 0.5).unwrap();
        assert!(close(v, -0.5 - 0.5 * PI.ln(), 1e-13));
        assert!(close(v, -1.072_364_942_924_7, 1e-12));
        assert!(close(v, grid_sup(2.0, 0.5), 1e-10));

        let v = fenchel_conjugate(3.0, 1.0 / 3.0).unwrap();
        assert!(close(v, -0.913_288_872_152_936, 1e-12), "{v}");
        assert!(close(v, grid_sup(3.0, 1.0 / 3.0), 1e-10));

        let p = family_point(2.0, -1.0).unwrap();
        let lhs = p.psi() + fenchel_conjugate(2.0, p.eta()).unwrap();
        assert!(close(lhs, p.theta() * p.eta(), 1e-12));
        assert!(close(lhs, -0.5, 1e-12));
    }

    #[test]
    fn divergence_examples() {
        assert_eq!(divergence(2.0, -1.3, -1.3).unwrap(), 0.0);
        let d = divergence(2.0, -2.0, -1.0).unwrap();
        assert!(close(d, 0.5 * (0.5f64.ln() + 1.0), 1e-15));
        assert!(close(d, 0.153_426_409_720_027, 1e-12));
        let kl = kl_oracle(2.0, -2.0, -1.0, &QuadConfig::default()).unwrap();
        assert!(close(kl, d, 1e-9));

        let e = std::f64::consts::E;
        let d = divergence(3.0, -e, -1.0).unwrap();
        assert!(close(d, (e - 2.0) / 3.0, 1e-15));
        assert!(close(d, 0.239_427_276_153_015, 1e-12));
        assert!(divergence(2.0, 0.0, -1.0).is_err());

        // θ close to 0 relative to the reference: ln(θ_ref/θ) = 19 exactly
        let t = -(-19.0f64).exp();
        let d = divergence(2.0, t, -1.0).unwrap();
        assert!(close(d, 0.5 * (18.0 + t.abs()), 1e-15));
        assert!(divergence(2.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn divergence_forms_agree() {
        for &(n, a, b) in &[(2.0, -2.0, -1.0), (3.0, -0.1, -7.0), (1.5, -4.0, -3.9)] {
            let closed = divergence(n, a, b).unwrap();
            assert!(close(closed, bregman_divergence(n, a, b).unwrap(), 1e-12));
            assert!(close(closed, three_term_divergence(n, a, b).unwrap(), 1e-12));
        }
    }

    #[test]
    fn cubic_form_examples() {
        assert!(close(cubic_form(2.0, -1.0).unwrap(), 1.0, 1e-15));
        assert!(close(cubic_form(3.0, -1.0).unwrap(), 2.0 / 3.0, 1e-15));
        assert!(close(cubic_form(2.0, -2.0).unwrap(), 0.125, 1e-15));
        assert!(cubic_form(2.0, 0.0).is_err());
    }

    #[test]
    fn product_examples() {
        let a = ProductPoint::new(2.0, -1.5, -0.5).unwrap();
        assert_eq!(product_divergence(2.0, &a, &a).unwrap(), 0.0);

        let o = ProductPoint::new(2.0, -1.0, -1.0).unwrap();
        let a = ProductPoint::new(2.0, -2.0, -1.0).unwrap();
        assert!(close(product_divergence(2.0, &a, &o).unwrap(), 0.153_426_409_720_027, 1e-12));
        let a = ProductPoint::new(2.0, -2.0, -2.0).unwrap();
        assert!(close(product_divergence(2.0, &a, &o).unwrap(), 0.306_852_819_440_055, 1e-12));

        let m = a.metric();
        assert_eq!(m[0][1], 0.0);
        assert_eq!(m[1][0], 0.0);
        assert!(close(m[0][0], 1.0 / 8.0, 1e-15));
        assert!(close(
            a.potential().unwrap(),
            2.0 * potential(2.0, -2.0).unwrap(),
            1e-15
        ));
        let other = ProductPoint::new(3.0, -1.0, -1.0).unwrap();
        assert!(product_divergence(2.0, &a, &other).is_err());
    }
}
