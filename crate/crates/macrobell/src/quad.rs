//! Deterministic adaptive quadrature.
//!
//! Adaptive Simpson with the standard Richardson error estimate. The
//! recursion bisects until the local error estimate drops below the local
//! tolerance share, so the total absolute error stays below `abs_tol`.
//! Everything is branch-deterministic: the same inputs always produce the
//! same float result.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 60;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    (h / 6.0) * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    // |S(left)+S(right) - S(whole)| <= 15 * tol guarantees error <= tol
    if delta.abs() <= 15.0 * tol || (b - a).abs() < f64::EPSILON * (a.abs() + b.abs()) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::numeric(format!(
            "adaptive Simpson failed to converge on [{a}, {b}]: \
             local error estimate {:.3e} exceeds tolerance {:.3e} at max depth {MAX_DEPTH}",
            delta.abs() / 15.0,
            tol
        )));
    }
    let l = adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("quadrature bounds must be finite".to_string()));
    }
    if a == b {
        return Ok(0.0);
    }
    if abs_tol <= 0.0 {
        return Err(Error::invalid("quadrature tolerance must be positive".to_string()));
    }
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    adapt(&f, a, b, fa, fm, fb, whole, abs_tol, MAX_DEPTH)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_pdf;

    #[test]
    fn polynomial_is_exact() {
        // Simpson is exact on cubics
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12).unwrap();
        // integral = x^4/4 - x^2 + x in [-1,3] = (81/4 - 9 + 3) - (1/4 - 1 - 1)
        assert!((v - 16.0).abs() < 1e-10, "got {v}");
    }

    #[test]
    fn gaussian_density_integrates_to_one() {
        let v = integrate(normal_pdf, -10.0, 10.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn gaussian_two_sigma_tail() {
        let v = integrate(normal_pdf, 2.0, 14.0, 1e-10).unwrap();
        assert!((v - 0.022750131948179207).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let v = integrate(|x| (20.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-9).unwrap();
        // integral of sin(20x) over [0, pi] = (1 - cos(20 pi))/20 = 0
        assert!(v.abs() < 1e-8, "got {v}");
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(integrate(|x| x, 0.0, f64::INFINITY, 1e-6).is_err());
        assert!(integrate(|x| x, 0.0, 1.0, 0.0).is_err());
        assert_eq!(integrate(|x| x, 2.0, 2.0, 1e-6).unwrap(), 0.0);
    }
}
