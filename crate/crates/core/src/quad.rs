//! Adaptive quadrature (Simpson with Richardson control).
//!
//! Used for the commutation-check block integrals and available to test
//! suites as a brute-force cross-check of the augmented-ODE integrals.

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 48;

/// Integrates f over [a, b] to the requested absolute-or-relative tolerance.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    if !(fa.is_finite() && fb.is_finite() && fm.is_finite()) {
        return Err(Error::Quadrature {
            a,
            b,
            err: f64::INFINITY,
        });
    }
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol.max(1e-15), MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return Err(Error::Quadrature {
            a,
            b,
            err: f64::INFINITY,
        });
    }
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = (left + right - whole).abs();
    if err <= 15.0 * tol * (1.0 + (left + right).abs()) {
        // Richardson extrapolation of the two half-interval estimates.
        return Ok(left + right + (left + right - whole) / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature { a, b, err });
    }
    // Halve the budget per side, floored at machine noise so that fine
    // subdivisions can still terminate.
    let half = (tol * 0.5).max(1e-15);
    let lv = adaptive(f, a, m, fa, flm, fm, left, half, depth - 1)?;
    let rv = adaptive(f, m, b, fm, frm, fb, right, half, depth - 1)?;
    Ok(lv + rv)
}

/// Cumulative integrals along a sorted grid: returns F with
/// F[k] = ∫ from grid[0] to grid[k].
pub fn cumulative(f: &dyn Fn(f64) -> f64, grid: &[f64], tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in grid.windows(2) {
        acc += integrate(f, w[0], w[1], tol)?;
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(&|t| 3.0 * t * t, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integrand() {
        let v = integrate(&|t| t.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn logarithmic_tail() {
        // ∫ dt/(t ln² t) from e to X = 1 − 1/ln X.
        let x = 1e4;
        let v = integrate(&|t: f64| 1.0 / (t * t.ln() * t.ln()), std::f64::consts::E, x, 1e-12)
            .unwrap();
        assert!((v - (1.0 - 1.0 / x.ln())).abs() < 1e-9);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        assert!(integrate(&|t: f64| 1.0 / t, -1.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        let c = cumulative(&|t| t.cos(), &grid, 1e-12).unwrap();
        for (k, t) in grid.iter().enumerate() {
            assert!((c[k] - t.sin()).abs() < 1e-10);
        }
    }
}
