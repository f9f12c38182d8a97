//! Slow reference solvers for checking `nepio-core`.
//!
//! Nothing here shares numerical code with the fast path beyond the data
//! types and the projection onto the simple set `S`. Every oracle either
//! converges to its tolerance or returns an [`OracleError`].

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView1};
use nepio_core::prox::ProxProblem;
use nepio_core::sets::{ConstraintSet, SimpleSet};
use nepio_core::solver::RegressionProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleError {
    pub oracle: &'static str,
    pub detail: String,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} oracle failed: {}", self.oracle, self.detail)
    }
}

impl std::error::Error for OracleError {}

pub type OracleResult<T> = Result<T, OracleError>;

fn fail<T>(oracle: &'static str, detail: impl Into<String>) -> OracleResult<T> {
    Err(OracleError { oracle, detail: detail.into() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Number of starting points for multi-start checks.
    pub step_count: usize,
    /// Relative duality-gap bound for the barrier solves; subgradient bound
    /// for the Lasso oracle.
    pub tol: f64,
    pub max_iter: usize,
    /// Step of scalar grid searches.
    pub grid_resolution: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { step_count: 3, tol: 1e-12, max_iter: 100_000, grid_resolution: 1e-4 }
    }
}

fn to_na(x: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[[i, j]])
}

/// Largest eigenvalue of `XᵀX` from a full symmetric eigendecomposition.
pub fn gram_spectral_norm(x: &Array2<f64>) -> f64 {
    let m = to_na(x);
    let gram = m.transpose() * &m;
    SymmetricEigen::new(gram).eigenvalues.max()
}

/// Scalar grid search: `(argmin, min)` of `f` on `[lo, hi]`.
pub fn grid_minimize(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let steps = ((hi - lo) / step).round() as usize;
    let mut best = (lo, f(lo));
    for i in 1..=steps {
        let s = lo + i as f64 * step;
        let v = f(s);
        if v < best.1 {
            best = (s, v);
        }
    }
    best
}

/// `Λ` (with an optional floor on `λ`) written as `G x ≤ h` over
/// `x = (λ, t)`. The auxiliary `t ∈ ℝᵏ` only exists for the ℓ1 ball, where
/// `‖Aλ‖₁ ≤ α` becomes `±(Aλ)ₑ ≤ tₑ, Σ tₑ ≤ α`.
struct Polyhedron {
    n: usize,
    g: DMatrix<f64>,
    h: DVector<f64>,
    interior: DVector<f64>,
}

impl Polyhedron {
    fn new(constraint: &ConstraintSet, lower: f64) -> OracleResult<Self> {
        let n = constraint.dim();
        let edges = constraint.edge_map().edges();
        let k = edges.len();
        let mut rows: Vec<(Vec<(usize, f64)>, f64)> = (0..n).map(|i| (vec![(i, -1.0)], -lower)).collect();
        let (nvar, interior) = match constraint.simple_set() {
            SimpleSet::NonnegativeOrthant => {
                for &[head, tail] in edges {
                    rows.push((vec![(head, -1.0), (tail, 1.0)], 0.0));
                }
                // heights along the edge order give Aλ > 0 strictly
                let mut height = vec![0.0_f64; n];
                let mut settled = false;
                for _ in 0..=n {
                    settled = true;
                    for &[head, tail] in edges {
                        if height[head] < height[tail] + 1.0 {
                            height[head] = height[tail] + 1.0;
                            settled = false;
                        }
                    }
                    if settled {
                        break;
                    }
                }
                if !settled {
                    return fail("polyhedron", "cone constraint has no interior (cyclic edge order)");
                }
                (n, DVector::from_iterator(n, height.iter().map(|h| lower + 1.0 + h)))
            }
            SimpleSet::L1Ball { radius } => {
                for (e, &[head, tail]) in edges.iter().enumerate() {
                    rows.push((vec![(head, 1.0), (tail, -1.0), (n + e, -1.0)], 0.0));
                    rows.push((vec![(head, -1.0), (tail, 1.0), (n + e, -1.0)], 0.0));
                }
                if k > 0 {
                    rows.push(((n..n + k).map(|j| (j, 1.0)).collect(), *radius));
                }
                let mut x0 = DVector::from_element(n + k, lower + 1.0);
                for e in 0..k {
                    x0[n + e] = radius / (2.0 * k as f64);
                }
                (n + k, x0)
            }
        };
        let mut g = DMatrix::zeros(rows.len(), nvar);
        let mut h = DVector::zeros(rows.len());
        for (r, (entries, rhs)) in rows.into_iter().enumerate() {
            for (j, v) in entries {
                g[(r, j)] += v;
            }
            h[r] = rhs;
        }
        Ok(Self { n, g, h, interior })
    }

    fn slack(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.h - &self.g * x
    }
}

/// Value, gradient and Hessian of a smooth convex function of `λ`; `None`
/// outside its domain.
type Model<'a> = dyn Fn(&DVector<f64>) -> Option<(f64, DVector<f64>, DMatrix<f64>)> + 'a;

/// Log-barrier interior-point method with damped Newton steps, stopped
/// once the duality-gap bound (constraint count)/t is below
/// `tol · max(1, |f|)`.
fn barrier_minimize(
    oracle: &'static str,
    model: &Model<'_>,
    poly: &Polyhedron,
    start: DVector<f64>,
    config: &OracleConfig,
) -> OracleResult<(DVector<f64>, f64)> {
    let n = poly.n;
    let nvar = start.len();
    let count = poly.h.len() as f64;
    let mut x = start;
    if poly.slack(&x).iter().any(|&s| s <= 0.0) {
        return fail(oracle, "start is not strictly feasible");
    }
    let barrier = |x: &DVector<f64>, t: f64| -> Option<f64> {
        let s = poly.slack(x);
        if s.iter().any(|&v| v <= 0.0) {
            return None;
        }
        let (f, _, _) = model(&x.rows(0, n).into_owned())?;
        Some(t * f - s.iter().map(|v| v.ln()).sum::<f64>())
    };
    let mut t = 1.0_f64;
    let mut newton_steps = 0;
    loop {
        for _ in 0..200 {
            newton_steps += 1;
            if newton_steps > config.max_iter {
                return fail(oracle, format!("no convergence in {} Newton steps", config.max_iter));
            }
            let s = poly.slack(&x);
            let Some((_, fg, fh)) = model(&x.rows(0, n).into_owned()) else {
                return fail(oracle, "iterate left the domain");
            };
            let inv_s = s.map(|v| 1.0 / v);
            let mut grad = poly.g.transpose() * &inv_s;
            let weighted = DMatrix::from_fn(poly.g.nrows(), nvar, |r, c| poly.g[(r, c)] * inv_s[r]);
            let mut hess = weighted.transpose() * &weighted;
            for i in 0..n {
                grad[i] += t * fg[i];
                for j in 0..n {
                    hess[(i, j)] += t * fh[(i, j)];
                }
            }
            let dx = match hess.clone().cholesky() {
                Some(ch) => -ch.solve(&grad),
                None => match hess.lu().solve(&(-&grad)) {
                    Some(d) => d,
                    None => return fail(oracle, "singular Newton system"),
                },
            };
            let decrement = -grad.dot(&dx);
            if !(decrement > 1e-12) {
                break;
            }
            let gdx = &poly.g * &dx;
            let mut step = 1.0_f64;
            for r in 0..gdx.len() {
                if gdx[r] > 0.0 {
                    step = step.min(0.99 * s[r] / gdx[r]);
                }
            }
            let phi = barrier(&x, t).unwrap_or(f64::INFINITY);
            loop {
                let trial = &x + &dx * step;
                if let Some(v) = barrier(&trial, t) {
                    if v <= phi - 0.25 * step * decrement {
                        x = trial;
                        break;
                    }
                }
                step *= 0.5;
                if step < 1e-14 {
                    break;
                }
            }
            if step < 1e-14 {
                // no measurable progress left at this barrier weight
                break;
            }
        }
        let (f, _, _) = model(&x.rows(0, n).into_owned()).expect("iterate stays in the domain");
        if count / t <= config.tol * f.abs().max(1.0) {
            return Ok((x.rows(0, n).into_owned(), f));
        }
        t *= 20.0;
    }
}

fn to_array(v: &DVector<f64>) -> Array1<f64> {
    Array1::from_iter(v.iter().copied())
}

/// Euclidean projection onto `Λ = {λ ≥ 0 : Aλ ∈ S}` by an interior-point
/// solve of the quadratic program.
pub fn project_onto_lambda(constraint: &ConstraintSet, x: ArrayView1<'_, f64>, config: &OracleConfig) -> OracleResult<Array1<f64>> {
    let n = x.len();
    let target = DVector::from_iterator(n, x.iter().copied());
    let model = |l: &DVector<f64>| {
        let d = l - &target;
        Some((0.5 * d.dot(&d), d, DMatrix::identity(n, n)))
    };
    let poly = Polyhedron::new(constraint, 0.0)?;
    let start = poly.interior.clone();
    let (lam, _) = barrier_minimize("projection", &model, &poly, start, config)?;
    Ok(to_array(&lam))
}

/// Prox of `ρΓ` over `ℝⁿ × Λ`: minimizes the reduced objective
/// `½‖λ − μ‖² + (ρ/2) Σ (αᵢ²/(λᵢ + ρ) + λᵢ)` over `Λ` directly, then sets
/// `βᵢ = αᵢλᵢ/(λᵢ + ρ)`.
///
/// Runs from `step_count` interior starts and fails if they disagree.
pub fn prox_oracle(problem: &ProxProblem<'_>, config: &OracleConfig) -> OracleResult<(Array1<f64>, Array1<f64>)> {
    let rho = problem.rho;
    let alpha = &problem.alpha;
    let mu = &problem.mu;
    let n = problem.n();
    let model = |l: &DVector<f64>| {
        if l.iter().any(|&v| v <= -rho) {
            return None;
        }
        let mut value = 0.0;
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            let a2 = alpha[i] * alpha[i];
            let p = l[i] + rho;
            value += 0.5 * (l[i] - mu[i]).powi(2) + 0.5 * rho * (a2 / p + l[i]);
            grad[i] = l[i] - mu[i] + 0.5 * rho * (1.0 - a2 / (p * p));
            hess[(i, i)] = 1.0 + rho * a2 / (p * p * p);
        }
        Some((value, grad, hess))
    };
    let poly = Polyhedron::new(problem.constraint, 0.0)?;
    let mut results = Vec::new();
    for j in 0..config.step_count.max(1) {
        // constant shifts leave Aλ unchanged, so every start is interior
        let mut start = poly.interior.clone();
        for i in 0..n {
            start[i] += 3.0 * j as f64;
        }
        results.push(barrier_minimize("prox", &model, &poly, start, config)?);
    }
    let best = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let worst = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    if worst - best > 10.0 * config.tol * best.abs().max(1.0) {
        return fail("prox", format!("multi-start spread {:e}", worst - best));
    }
    let lam = to_array(&results.into_iter().find(|r| r.1 == best).unwrap().0);
    let beta = Array1::from_shape_fn(n, |i| alpha[i] * lam[i] / (lam[i] + rho));
    Ok((beta, lam))
}

/// `z = (ρI + XΛXᵀ)⁻¹ y` and the Cholesky factor used for it.
fn ridge_dual(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: &DVector<f64>,
    rho: f64,
) -> Option<(DVector<f64>, nalgebra::Cholesky<f64, nalgebra::Dyn>)> {
    let scaled = x * DMatrix::from_diagonal(lambda);
    let mut m = &scaled * x.transpose();
    for i in 0..m.nrows() {
        m[(i, i)] += rho;
    }
    let chol = m.cholesky()?;
    Some((chol.solve(y), chol))
}

/// Solves the full problem by eliminating `β` exactly and minimizing over `λ`.
///
/// For fixed `λ` the `β` block is a weighted ridge problem with minimizer
/// `β = ΛXᵀz`, `z = (ρI + XΛXᵀ)⁻¹y`, and minimum value `(ρ/2) yᵀz`. The
/// resulting `F(λ) = (ρ/2) yᵀz + (ρ/2) Σ λᵢ` is convex and smooth up to
/// `λ = 0`, with `∂F/∂λᵢ = (ρ/2)(1 − (xᵢᵀz)²)` and Hessian
/// `ρ (gᵢgⱼ)(xᵢᵀ(ρI + XΛXᵀ)⁻¹xⱼ)`, `g = Xᵀz`. It is minimized over `Λ` by the
/// barrier method, then the `β` step is applied once more.
pub fn full_problem_oracle(
    problem: &RegressionProblem,
    constraint: &ConstraintSet,
    config: &OracleConfig,
) -> OracleResult<(Array1<f64>, Array1<f64>)> {
    let x = to_na(&problem.x);
    let y = DVector::from_iterator(problem.m(), problem.y.iter().copied());
    let rho = problem.rho;
    let n = problem.n();
    let model = |l: &DVector<f64>| {
        if l.iter().any(|&v| v < 0.0) {
            return None;
        }
        let (z, chol) = ridge_dual(&x, &y, l, rho)?;
        let g = x.transpose() * &z;
        let k = x.transpose() * chol.solve(&x);
        let value = 0.5 * rho * (y.dot(&z) + l.sum());
        let grad = g.map(|gi| 0.5 * rho * (1.0 - gi * gi));
        let hess = DMatrix::from_fn(n, n, |i, j| rho * g[i] * g[j] * k[(i, j)]);
        Some((value, grad, hess))
    };
    let poly = Polyhedron::new(constraint, 0.0)?;
    let start = poly.interior.clone();
    let (lam, _) = barrier_minimize("full problem", &model, &poly, start, config)?;
    let Some((z, _)) = ridge_dual(&x, &y, &lam, rho) else {
        return fail("full problem", "ridge system not positive definite");
    };
    let beta = Array1::from_shape_fn(n, |i| lam[i] * x.column(i).dot(&z));
    Ok((beta, to_array(&lam)))
}

/// Upper estimate of `Ω(β|Λ) = inf {Γ(β, λ) : λ ∈ Λ}` by the barrier method
/// over the interior of `Λ`. Never below `‖β‖₁`, since `Γ(β, λ) ≥ ‖β‖₁` for
/// every `λ > 0`.
pub fn omega_value(beta: ArrayView1<'_, f64>, constraint: &ConstraintSet, config: &OracleConfig) -> OracleResult<f64> {
    if beta.iter().all(|&b| b == 0.0) {
        return Ok(0.0);
    }
    let n = beta.len();
    let b2: Vec<f64> = beta.iter().map(|b| b * b).collect();
    let model = |l: &DVector<f64>| {
        if l.iter().any(|&v| v <= 0.0) {
            return None;
        }
        let value = 0.5 * (0..n).map(|i| b2[i] / l[i] + l[i]).sum::<f64>();
        let grad = DVector::from_fn(n, |i, _| 0.5 * (1.0 - b2[i] / (l[i] * l[i])));
        let hess = DMatrix::from_fn(n, n, |i, j| if i == j { b2[i] / l[i].powi(3) } else { 0.0 });
        Some((value, grad, hess))
    };
    let poly = Polyhedron::new(constraint, 0.0)?;
    let (_, value) = barrier_minimize("omega", &model, &poly, poly.interior.clone(), config)?;
    Ok(value)
}

/// Lasso by cyclic exact coordinate minimization, stopped when the
/// minimum-norm subgradient of `½‖Xβ − y‖² + ρ‖β‖₁` is below `tol`.
pub fn lasso_oracle(problem: &RegressionProblem, config: &OracleConfig) -> OracleResult<Array1<f64>> {
    let x = &problem.x;
    let rho = problem.rho;
    let n = problem.n();
    let col_sq: Vec<f64> = (0..n).map(|j| x.column(j).dot(&x.column(j))).collect();
    let mut beta = Array1::<f64>::zeros(n);
    let mut resid = problem.y.clone() * -1.0; // Xβ − y
    let scale = 1.0 + x.t().dot(&problem.y).iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    for sweep in 0..config.max_iter {
        for j in 0..n {
            if col_sq[j] == 0.0 {
                continue;
            }
            let col = x.column(j);
            let g = col.dot(&resid);
            let target = beta[j] - g / col_sq[j];
            let level = rho / col_sq[j];
            let next = if target > level {
                target - level
            } else if target < -level {
                target + level
            } else {
                0.0
            };
            let delta = next - beta[j];
            if delta != 0.0 {
                resid.scaled_add(delta, &col);
                beta[j] = next;
            }
        }
        if sweep % 10 == 0 || sweep + 1 == config.max_iter {
            resid = x.dot(&beta) - &problem.y;
            let grad = x.t().dot(&resid);
            let worst = (0..n)
                .map(|j| if beta[j] != 0.0 { (grad[j] + rho * beta[j].signum()).abs() } else { (grad[j].abs() - rho).max(0.0) })
                .fold(0.0_f64, f64::max);
            if worst <= config.tol * scale {
                return Ok(beta);
            }
        }
    }
    fail("lasso", format!("no convergence in {} sweeps", config.max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_minimize_quadratic() {
        let (x, v) = grid_minimize(|s| (s - 0.3).powi(2), 0.0, 1.0, 1e-3);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(v < 1e-12);
    }
}
