//! Adaptive Simpson quadrature.
//!
//! Used for the kernel weights of the variable-coefficient flux operator
//! and as the independent oracle against which the closed-form ground
//! state moments are checked.

/// ∫ₐᵇ f dx by adaptive Simpson with absolute tolerance `tol`.
///
/// Recursion depth is capped at 60 (past that the interval width is at
/// machine scale and the best estimate is returned).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        // Richardson correction of the two-panel estimate.
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-14);
        // ∫₋₁³ (x³ − 2x + 1) dx = [x⁴/4 − x² + x] = (81/4 − 9 + 3) − (1/4 − 1 − 1) = 16
        assert!((v - 16.0).abs() < 1e-12);
    }

    #[test]
    fn matches_known_transcendental_integral() {
        let v = adaptive_simpson(&f64::exp, 0.0, 1.0, 1e-13);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn handles_peaked_integrand() {
        // ∫ sech²(20x) dx over the real line = 2/20 = 0.1; the window
        // [−5, 5] captures it to far better than the tolerance.
        let v = adaptive_simpson(
            &|x: f64| {
                let c = (20.0 * x).cosh();
                1.0 / (c * c)
            },
            -5.0,
            5.0,
            1e-13,
        );
        assert!((v - 0.1).abs() < 1e-12);
    }
}
