use crate::error::{Error, Result};
use crate::numerics::quad::checked;

const MAX_ITERATIONS: usize = 400;

/// Root of a continuous, strictly monotone `g` on `[lo, hi]`.
///
/// Secant (false-position) steps inside the bracket; whenever a step fails
/// to halve the bracket the next step is a bisection. Stops once the bracket
/// is no wider than `tol` and returns the endpoint with the smaller |g|.
pub fn find_root_bracketed<G>(g: G, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::domain(format!("root tolerance must be positive, got {tol}")));
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::domain(format!("bracket [{lo}, {hi}] must be finite")));
    }
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = checked(a, g(a))?;
    let mut fb = checked(b, g(b))?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BadBracket { lo: a, hi: b, g_lo: fa, g_hi: fb });
    }

    let mut bisect = false;
    for _ in 0..MAX_ITERATIONS {
        let width = b - a;
        if width <= tol {
            break;
        }
        let mid = a + 0.5 * width;
        let mut x = if bisect { mid } else { b - fb * (b - a) / (fb - fa) };
        if !(x > a && x < b) {
            x = mid;
        }
        if x <= a || x >= b {
            // no representable point strictly inside
            break;
        }
        let fx = checked(x, g(x))?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        bisect = (b - a) > 0.5 * width;
    }
    Ok(if fa.abs() <= fb.abs() { a } else { b })
}
