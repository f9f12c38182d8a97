//! Scalar prox of the `φ₁` term.
//!
//! Minimizes `h(s) = (s − μ)² + r (α²/(s + ρ) + s)` over `s ≥ 0`. Setting
//! `h'(s) = 0` and substituting `x = s + ρ` gives the cubic
//! `2x³ + (r − 2(μ + ρ))x² − rα² = 0`; the minimizer is `(x₀ − ρ)₊` for its
//! largest real root `x₀`.

/// `h(s)` above; `+∞` outside the domain `s ≥ 0`.
pub fn cubic_prox_objective(s: f64, mu: f64, alpha: f64, r: f64, rho: f64) -> f64 {
    if s < 0.0 {
        return f64::INFINITY;
    }
    (s - mu) * (s - mu) + r * (alpha * alpha / (s + rho) + s)
}

/// The optimality polynomial `2x³ + (r − 2(μ + ρ))x² − rα²`.
pub fn cubic_prox_polynomial(x: f64, mu: f64, alpha: f64, r: f64, rho: f64) -> f64 {
    (2.0 * x + (r - 2.0 * (mu + rho))) * x * x - r * alpha * alpha
}

/// Minimizer of [`cubic_prox_objective`] over `s ≥ 0`.
///
/// Requires `r > 0` and `rho > 0`.
pub fn cubic_prox_scalar(mu: f64, alpha: f64, r: f64, rho: f64) -> f64 {
    cubic_prox_scalar_near(mu, alpha, r, rho, f64::NAN)
}

/// [`cubic_prox_scalar`] with a hint `guess` for the minimizer, used as the
/// Newton start when it lies on the convex side of the root.
pub(crate) fn cubic_prox_scalar_near(mu: f64, alpha: f64, r: f64, rho: f64, guess: f64) -> f64 {
    debug_assert!(r > 0.0 && rho > 0.0, "cubic prox needs r > 0 and rho > 0");
    if alpha == 0.0 {
        // x²(2x + r − 2(μ+ρ)): soft threshold of μ at r/2
        return (mu - 0.5 * r).max(0.0);
    }
    let b = r - 2.0 * (mu + rho);
    let ra2 = r * alpha * alpha;
    let g = |x: f64| (2.0 * x + b) * x * x - ra2;
    // On x > 0 the sign of g is the sign of h'(x − ρ), which is increasing,
    // so the positive root is unique and g(ρ) ≥ 0 means the minimum is at 0.
    if g(rho) >= 0.0 {
        return 0.0;
    }
    // The root lies past max(0, −b/3), where g is increasing and convex, so
    // Newton from any point right of the root decreases monotonically. A
    // guess left of the root but in that region overshoots to the right in
    // one step.
    let rising = (-b / 3.0).max(0.0);
    let hint = guess + rho;
    let mut x0 = if hint > rho && hint > rising { hint } else { (-0.5 * b).max(0.0) + (0.5 * ra2).cbrt() };
    for _ in 0..100 {
        let gx = g(x0);
        if gx.abs() <= 8.0 * f64::EPSILON * ((2.0 * x0 + b.abs()) * x0 * x0 + ra2) {
            break;
        }
        let next = x0 - gx / ((6.0 * x0 + 2.0 * b) * x0);
        if gx > 0.0 && !(next < x0) {
            break;
        }
        // quadratic convergence: a step this small leaves an error near its square
        let done = (next - x0).abs() <= 1e-9 * x0;
        x0 = next.max(rho);
        if done {
            break;
        }
    }
    (x0 - rho).max(0.0)
}

/// Largest real root of `x³ + a x² + b x + c` by the depressed-cubic formulas
/// (trigonometric form for three real roots, hyperbolic otherwise).
pub fn largest_real_root_monic(a: f64, b: f64, c: f64) -> f64 {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let t = if p == 0.0 {
        (-q).cbrt()
    } else if p < 0.0 {
        let m = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        if arg.abs() <= 1.0 {
            2.0 * m * (arg.acos() / 3.0).cos()
        } else {
            -2.0 * q.signum() * m * (arg.abs().acosh() / 3.0).cosh()
        }
    } else {
        let m = (p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (3.0 / p).sqrt();
        -2.0 * m * (arg.asinh() / 3.0).sinh()
    };
    let mut x = t - shift;
    // two Newton steps on the monic cubic
    for _ in 0..2 {
        let f = ((x + a) * x + b) * x + c;
        let df = (3.0 * x + 2.0 * a) * x + b;
        if df != 0.0 && df.is_finite() {
            let next = x - f / df;
            if next.is_finite() {
                x = next;
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense grid search for the minimizer of h on [0, upper].
    fn grid_minimizer(mu: f64, alpha: f64, r: f64, rho: f64, upper: f64, step: f64) -> (f64, f64) {
        let steps = (upper / step).round() as usize;
        let mut best = (0.0, f64::INFINITY);
        for i in 0..=steps {
            let s = i as f64 * step;
            let h = cubic_prox_objective(s, mu, alpha, r, rho);
            if h < best.1 {
                best = (s, h);
            }
        }
        best
    }

    #[test]
    fn alpha_zero_is_soft_threshold() {
        assert_eq!(cubic_prox_scalar(3.0, 0.0, 2.0, 0.7), 2.0);
        assert_eq!(cubic_prox_scalar(0.5, 0.0, 2.0, 0.7), 0.0);
        assert_eq!(cubic_prox_scalar(0.0, 0.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn reference_tuple_matches_grid() {
        // μ = 1, α = 1, r = 1, ρ = 1: largest root of 2x³ − 3x² − 1 (value from a
        // 30-digit root finder)
        let s = cubic_prox_scalar(1.0, 1.0, 1.0, 1.0);
        let (grid_s, grid_h) = grid_minimizer(1.0, 1.0, 1.0, 1.0, 10.0, 1e-6);
        assert!((s - grid_s).abs() < 1e-5, "{s} vs {grid_s}");
        assert!(cubic_prox_objective(s, 1.0, 1.0, 1.0, 1.0) <= grid_h + 1e-12);
        let x0 = s + 1.0;
        assert!((2.0 * x0.powi(3) - 3.0 * x0 * x0 - 1.0).abs() < 1e-12);
        assert!((s - 0.677650698804060).abs() < 1e-12);
    }

    #[test]
    fn closed_form_roots() {
        // (x − 1)(x − 2)(x − 3)
        assert!((largest_real_root_monic(-6.0, 11.0, -6.0) - 3.0).abs() < 1e-12);
        // x³ − 8: single real root
        assert!((largest_real_root_monic(0.0, 0.0, -8.0) - 2.0).abs() < 1e-12);
        // (x − 1)(x² + 1) = x³ − x² + x − 1, p > 0 branch
        assert!((largest_real_root_monic(-1.0, 1.0, -1.0) - 1.0).abs() < 1e-12);
        // (x + 5)(x² + 1): one real root, p < 0, hyperbolic branch
        assert!((largest_real_root_monic(5.0, 1.0, 5.0) + 5.0).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn hint_does_not_change_result(
            mu in -5.0f64..5.0,
            alpha in -5.0f64..5.0,
            r in 1e-3f64..5.0,
            rho in 1e-3f64..5.0,
            guess in -1.0f64..30.0,
        ) {
            let cold = cubic_prox_scalar(mu, alpha, r, rho);
            let warm = cubic_prox_scalar_near(mu, alpha, r, rho, guess);
            prop_assert!((cold - warm).abs() <= 1e-10 * cold.max(1.0), "{cold} vs {warm}");
        }

        #[test]
        fn optimality_conditions(
            mu in -5.0f64..5.0,
            alpha in -5.0f64..5.0,
            r in 1e-3f64..5.0,
            rho in 1e-3f64..5.0,
        ) {
            let s = cubic_prox_scalar(mu, alpha, r, rho);
            prop_assert!(s >= 0.0);
            if s > 0.0 {
                let p = cubic_prox_polynomial(s + rho, mu, alpha, r, rho);
                prop_assert!(p.abs() <= 1e-8, "residual {p}");
            }
            let hs = cubic_prox_objective(s, mu, alpha, r, rho);
            for i in 0..=400 {
                let t = i as f64 * 0.05;
                prop_assert!(hs <= cubic_prox_objective(t, mu, alpha, r, rho) + 1e-12);
            }
        }
    }
}
