//! Integers as divergence level sets: θ_A is the point with D(θ_A‖θ₀) = Aⁿ.
//!
//! With t = θ/θ₀ the divergence from the reference is (1/n)(t − ln t − 1),
//! strictly monotone on each side of t = 1. The solver works in u = ln t so
//! both branches are handled on an unbounded, well-scaled variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::{check_exponent, check_theta, divergence, product_divergence, ProductPoint};
use crate::numerics::find_root_bracketed;

/// Default reference point.
pub const DEFAULT_THETA0: f64 = -1.0;
/// Default closure tolerance in energy units.
pub const DEFAULT_CLOSURE_TOL: f64 = 1e-6;
/// Default accepted |D(θ_A‖θ₀) − Aⁿ| relative to max(1, Aⁿ).
pub const DEFAULT_SOLVER_TOL: f64 = 1e-12;

/// Which side of the reference point the lattice lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// θ_A < θ₀ (further from the boundary θ = 0).
    #[default]
    #[serde(alias = "below")]
    BelowReference,
    /// θ₀ < θ_A < 0.
    #[serde(alias = "above")]
    AboveReference,
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "below" | "below_reference" => Ok(Branch::BelowReference),
            "above" | "above_reference" => Ok(Branch::AboveReference),
            other => Err(Error::domain(format!("unknown branch {other:?}, expected below|above"))),
        }
    }
}

fn energy(n: f64, k: u64) -> f64 {
    (k as f64).powf(n)
}

/// Solves eᵘ − u − 1 = target on the requested branch (u > 0 below, u < 0 above).
fn solve_log_ratio(target: f64, branch: Branch) -> Result<f64> {
    if target == 0.0 {
        return Ok(0.0);
    }
    let h = |u: f64| u.exp_m1() - u - target;
    let (lo, hi) = match branch {
        Branch::BelowReference => {
            let mut hi = 1.0;
            while h(hi) < 0.0 {
                hi *= 2.0;
                if hi > 1024.0 {
                    return Err(Error::BadBracket { lo: 0.0, hi, g_lo: h(0.0), g_hi: h(hi) });
                }
            }
            (0.0, hi)
        }
        Branch::AboveReference => {
            let mut lo = -1.0;
            while h(lo) < 0.0 {
                lo *= 2.0;
                if !lo.is_finite() {
                    return Err(Error::BadBracket { lo, hi: 0.0, g_lo: h(lo), g_hi: h(0.0) });
                }
            }
            (lo, 0.0)
        }
    };
    let width_tol = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    find_root_bracketed(h, lo, hi, width_tol)
}

/// θ_A with D(θ_A‖θ₀) = Aⁿ on the given branch.
///
/// `tol` bounds |D(θ_A‖θ₀) − Aⁿ| relative to max(1, Aⁿ); the residual is
/// checked after solving.
pub fn embed_integer(n: f64, theta0: f64, a: u64, branch: Branch, tol: f64) -> Result<f64> {
    check_exponent(n)?;
    check_theta(theta0)?;
    if a == 0 {
        return Err(Error::domain("integers are embedded from 1 upward"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::domain(format!("solver tolerance must be positive, got {tol}")));
    }
    let target = energy(n, a);
    let u = solve_log_ratio(n * target, branch)?;
    let theta = theta0 * u.exp();
    if !(theta < 0.0 && theta.is_finite()) {
        return Err(Error::domain(format!(
            "theta_A = theta0*exp({u}) is not representable; A={a} is out of range for this branch"
        )));
    }
    let residual = (divergence(n, theta, theta0)? - target).abs();
    let allowed = tol * target.max(1.0);
    if residual > allowed {
        return Err(Error::ToleranceNotMet { residual, tolerance: allowed });
    }
    Ok(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub k: u64,
    pub theta: f64,
    /// kⁿ, the prescribed divergence from the reference point.
    pub energy: f64,
}

/// The integers 1..=K embedded relative to one reference point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeEmbedding {
    pub n: f64,
    pub theta0: f64,
    /// The unit point, D(θ₁‖θ₀) = 1.
    pub theta1: f64,
    pub branch: Branch,
    pub points: Vec<LatticePoint>,
}

pub fn build_lattice(n: f64, theta0: f64, k_max: u64, branch: Branch, tol: f64) -> Result<LatticeEmbedding> {
    if k_max < 1 {
        return Err(Error::domain("lattice needs K >= 1"));
    }
    let points = (1..=k_max)
        .map(|k| {
            Ok(LatticePoint {
                k,
                theta: embed_integer(n, theta0, k, branch, tol)?,
                energy: energy(n, k),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LatticeEmbedding {
        n,
        theta0,
        theta1: points[0].theta,
        branch,
        points,
    })
}

/// Fisher–Rao length between two parameters: (1/√n)|ln(θ_b/θ_a)|.
pub fn riemannian_gap(n: f64, theta_a: f64, theta_b: f64) -> Result<f64> {
    check_exponent(n)?;
    check_theta(theta_a)?;
    check_theta(theta_b)?;
    Ok((theta_b / theta_a).ln().abs() / n.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    /// Index of the starting point; k = 0 is the reference point θ₀.
    pub k: u64,
    pub theta_k: f64,
    /// Distance from θ_k to θ_{k+1}.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    pub n: f64,
    pub theta0: f64,
    pub entries: Vec<GapEntry>,
}

impl GapTable {
    /// True when every gap is strictly smaller than the previous one.
    pub fn strictly_decreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].gap < w[0].gap)
    }
}

/// Adjacent gaps θ₀→θ₁, θ₁→θ₂, …, θ_{K−1}→θ_K.
pub fn gap_table(emb: &LatticeEmbedding) -> Result<GapTable> {
    if emb.points.len() < 2 {
        return Err(Error::TooFewPoints(emb.points.len()));
    }
    let mut chain = Vec::with_capacity(emb.points.len() + 1);
    chain.push((0u64, emb.theta0));
    chain.extend(emb.points.iter().map(|p| (p.k, p.theta)));
    let entries = chain
        .windows(2)
        .map(|w| {
            Ok(GapEntry {
                k: w[0].0,
                theta_k: w[0].1,
                gap: riemannian_gap(emb.n, w[0].1, w[1].1)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GapTable {
        n: emb.n,
        theta0: emb.theta0,
        entries,
    })
}

/// Closure test of a candidate triple through the embedded geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub n: f64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    /// Aⁿ + Bⁿ.
    pub energy_sum: f64,
    /// Cⁿ.
    pub target_energy: f64,
    /// D(R‖O) − D(θ_C‖θ₀), i.e. Aⁿ + Bⁿ − Cⁿ measured on the manifold.
    pub defect: f64,
    /// D(R‖O) for R = (θ_A, θ_B), O = (θ₀, θ₀).
    pub theta_r_energy: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub theta_c: f64,
    pub closed: bool,
}

/// Embeds A on axis 1 and B on axis 2 of the product manifold, C on the
/// line, and compares the hypotenuse energy with Cⁿ.
pub fn pythagoras_closure(
    n: f64,
    theta0: f64,
    (a, b, c): (u64, u64, u64),
    branch: Branch,
    tol: f64,
) -> Result<ClosureReport> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::domain(format!("closure tolerance must be nonnegative, got {tol}")));
    }
    let theta_a = embed_integer(n, theta0, a, branch, DEFAULT_SOLVER_TOL)?;
    let theta_b = embed_integer(n, theta0, b, branch, DEFAULT_SOLVER_TOL)?;
    let theta_c = embed_integer(n, theta0, c, branch, DEFAULT_SOLVER_TOL)?;
    let r = ProductPoint::new(n, theta_a, theta_b)?;
    let origin = ProductPoint::new(n, theta0, theta0)?;
    let theta_r_energy = product_divergence(n, &r, &origin)?;
    let defect = theta_r_energy - divergence(n, theta_c, theta0)?;
    Ok(ClosureReport {
        n,
        a,
        b,
        c,
        energy_sum: energy(n, a) + energy(n, b),
        target_energy: energy(n, c),
        defect,
        theta_r_energy,
        theta_a,
        theta_b,
        theta_c,
        closed: defect.abs() <= tol,
    })
}

/// Summary of an exhaustive closure scan over 1 ≤ A ≤ B, 1 ≤ C ≤ `max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureScan {
    pub n: f64,
    pub max: u64,
    pub closures: Vec<(u64, u64, u64)>,
    pub min_abs_defect: f64,
    pub argmin: (u64, u64, u64),
}

/// Scans every triple through the embedded energies of one lattice.
pub fn closure_scan(n: f64, theta0: f64, max: u64, branch: Branch, tol: f64) -> Result<ClosureScan> {
    let lattice = build_lattice(n, theta0, max, branch, DEFAULT_SOLVER_TOL)?;
    let measured = lattice
        .points
        .iter()
        .map(|p| divergence(n, p.theta, theta0))
        .collect::<Result<Vec<_>>>()?;
    let mut closures = Vec::new();
    let mut best = (f64::INFINITY, (0, 0, 0));
    for a in 1..=max {
        for b in a..=max {
            let hyp = measured[a as usize - 1] + measured[b as usize - 1];
            for c in 1..=max {
                let defect = hyp - measured[c as usize - 1];
                if defect.abs() <= tol {
                    closures.push((a, b, c));
                }
                if defect.abs() < best.0 {
                    best = (defect.abs(), (a, b, c));
                }
            }
        }
    }
    Ok(ClosureScan {
        n,
        max,
        closures,
        min_abs_defect: best.0,
        argmin: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain bisection on the closed form t − ln t = rhs, t > 1.
    fn bisect_t(rhs: f64) -> f64 {
        let (mut lo, mut hi) = (1.0, 2.0 * rhs + 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - mid.ln() < rhs {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn embed_examples() {
        let t1 = embed_integer(2.0, -1.0, 1, Branch::BelowReference, 1e-12).unwrap();
        assert!((t1 + bisect_t(3.0)).abs() < 1e-12);
        assert!((t1 + 4.505_241_495_792_88).abs() < 1e-11, "{t1}");

        let t2 = embed_integer(3.0, -1.0, 2, Branch::BelowReference, 1e-12).unwrap();
        assert!((t2 + bisect_t(25.0)).abs() < 1e-11);
        assert!((t2 + 28.344_430_557_889_9).abs() < 1e-9, "{t2}");
    }

    #[test]
    fn zero_target_is_the_reference() {
        assert_eq!(solve_log_ratio(0.0, Branch::BelowReference).unwrap(), 0.0);
        assert!(embed_integer(2.0, -1.0, 0, Branch::BelowReference, 1e-12).is_err());
    }

    #[test]
    fn above_branch() {
        let theta = embed_integer(2.0, -1.0, 1, Branch::AboveReference, 1e-12).unwrap();
        assert!(theta > -1.0 && theta < 0.0);
        assert!((divergence(2.0, theta, -1.0).unwrap() - 1.0).abs() < 1e-12);
        // energies far beyond the representable part of (θ₀, 0)
        assert!(embed_integer(3.0, -1.0, 1000, Branch::AboveReference, 1e-12).is_err());
    }

    #[test]
    fn lattice_examples() {
        let l = build_lattice(2.0, -1.0, 1, Branch::BelowReference, 1e-12).unwrap();
        assert_eq!(l.points.len(), 1);
        assert_eq!(l.theta1, l.points[0].theta);

        for &(n, k) in &[(2.0, 3u64), (3.0, 2)] {
            let l = build_lattice(n, -1.0, k, Branch::BelowReference, 1e-12).unwrap();
            for p in &l.points {
                let d = divergence(n, p.theta, -1.0).unwrap();
                assert!((d - (p.k as f64).powf(n)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gap_examples() {
        assert_eq!(riemannian_gap(2.0, -1.3, -1.3).unwrap(), 0.0);
        let g = riemannian_gap(2.0, -1.0, -4.505_241_495_8).unwrap();
        assert!((g - 1.064_366_468_999_65).abs() < 1e-12, "{g}");
        assert!((riemannian_gap(1.0, -1.0, -std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gap_tables() {
        let l = build_lattice(2.0, -1.0, 1, Branch::BelowReference, 1e-12).unwrap();
        assert!(matches!(gap_table(&l), Err(Error::TooFewPoints(1))));

        let l = build_lattice(2.0, -1.0, 2, Branch::BelowReference, 1e-12).unwrap();
        let t = gap_table(&l).unwrap();
        assert_eq!(t.entries.len(), 2);
        assert!(t.entries[0].gap != t.entries[1].gap);

        let l = build_lattice(2.0, -1.0, 4, Branch::BelowReference, 1e-12).unwrap();
        let t = gap_table(&l).unwrap();
        assert!(t.strictly_decreasing());
        for (e, w) in t.entries.iter().zip(l.points.iter()) {
            assert!((e.gap - riemannian_gap(2.0, e.theta_k, w.theta).unwrap()).abs() == 0.0);
        }
    }

    #[test]
    fn closure_examples() {
        let r = pythagoras_closure(2.0, -1.0, (3, 4, 5), Branch::BelowReference, 1e-6).unwrap();
        assert!(r.closed && r.defect.abs() < 1e-9);
        let r = pythagoras_closure(3.0, -1.0, (3, 4, 5), Branch::BelowReference, 1e-6).unwrap();
        assert!(!r.closed && (r.defect + 34.0).abs() < 1e-9);
        let r = pythagoras_closure(3.0, -1.0, (6, 8, 9), Branch::BelowReference, 1e-6).unwrap();
        assert!(!r.closed && (r.defect + 1.0).abs() < 1e-9);
        assert_eq!(r.energy_sum, 728.0);
        assert_eq!(r.target_energy, 729.0);
    }

    #[test]
    fn branch_parsing() {
        assert_eq!("below".parse::<Branch>().unwrap(), Branch::BelowReference);
        assert_eq!("above".parse::<Branch>().unwrap(), Branch::AboveReference);
        assert!("sideways".parse::<Branch>().is_err());
    }
}
