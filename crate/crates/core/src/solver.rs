//! Accelerated proximal outer loop for
//! `min ½‖Xβ − y‖² + ρ Γ(β, λ)` over `β ∈ ℝⁿ, λ ∈ Λ`, plus a plain
//! soft-threshold FISTA for the Lasso.

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::prox::{gamma_penalty, prox_gamma, FixedPointSettings, ProxProblem};
use crate::sets::ConstraintSet;

/// Dense least-squares data with penalty weight `rho`.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub rho: f64,
}

impl RegressionProblem {
    pub fn new(x: Array2<f64>, y: Array1<f64>, rho: f64) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidDimension(format!("design matrix is {}x{}", x.nrows(), x.ncols())));
        }
        check_dim(x.nrows(), y.len())?;
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
        }
        Ok(Self { x, y, rho })
    }

    pub fn m(&self) -> usize {
        self.x.nrows()
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    pub fn residual(&self, beta: ArrayView1<'_, f64>) -> Array1<f64> {
        self.x.dot(&beta) - &self.y
    }

    /// `E(β) = ½‖Xβ − y‖²`.
    pub fn data_fit(&self, beta: ArrayView1<'_, f64>) -> f64 {
        let r = self.residual(beta);
        0.5 * r.dot(&r)
    }

    /// `∇E(β) = Xᵀ(Xβ − y)`.
    pub fn gradient(&self, beta: ArrayView1<'_, f64>) -> Array1<f64> {
        transpose_matvec(&self.x, self.residual(beta).view())
    }

    /// Parses `{"X": [[..], ..], "y": [..], "rho": r}` (row-major `X`).
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)?;
        if file.schema_version != crate::SCHEMA_VERSION {
            return Err(Error::SchemaVersion(file.schema_version));
        }
        let m = file.x.len();
        let n = file.x.first().map_or(0, Vec::len);
        if let Some(bad) = file.x.iter().position(|row| row.len() != n) {
            return Err(Error::InvalidDimension(format!("row {bad} of X has {} entries, expected {n}", file.x[bad].len())));
        }
        let x =
            Array2::from_shape_vec((m, n), file.x.into_iter().flatten().collect()).map_err(|e| Error::InvalidDimension(e.to_string()))?;
        Self::new(x, Array1::from(file.y), file.rho)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ProblemFile {
            schema_version: crate::SCHEMA_VERSION,
            x: self.x.outer_iter().map(|r| r.to_vec()).collect(),
            y: self.y.to_vec(),
            rho: self.rho,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ProblemFile {
    #[serde(default = "crate::schema_version")]
    schema_version: u32,
    #[serde(rename = "X")]
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LipschitzMethod {
    ExactSvd,
    PowerIteration,
    #[default]
    Lanczos,
}

/// `Xᵀr`, accumulated over the contiguous rows of `X`.
pub fn transpose_matvec(x: &Array2<f64>, r: ArrayView1<'_, f64>) -> Array1<f64> {
    let mut out = Array1::zeros(x.ncols());
    for (row, &ri) in x.outer_iter().zip(r.iter()) {
        if ri != 0.0 {
            out.scaled_add(ri, &row);
        }
    }
    out
}

fn gram_apply(x: &Array2<f64>, v: ArrayView1<'_, f64>) -> Array1<f64> {
    transpose_matvec(x, x.dot(&v).view())
}

fn start_vector(n: usize) -> Array1<f64> {
    let v: Array1<f64> = (0..n).map(|i| 1.0 + ((i * 7919 + 13) % 101) as f64 / 101.0).collect();
    let norm = v.dot(&v).sqrt();
    v / norm
}

/// `‖XᵀX‖₂`, the largest squared singular value of `X`.
pub fn spectral_norm_sq(x: &Array2<f64>, method: LipschitzMethod) -> f64 {
    match method {
        LipschitzMethod::ExactSvd => {
            let (m, n) = x.dim();
            let dense = nalgebra::DMatrix::from_fn(m, n, |i, j| x[[i, j]]);
            let s = dense.singular_values().max();
            s * s
        }
        LipschitzMethod::PowerIteration => power_iteration_gram(x),
        LipschitzMethod::Lanczos => lanczos_gram(x),
    }
}

fn power_iteration_gram(x: &Array2<f64>) -> f64 {
    const MAX_ITER: usize = 10_000;
    const REL_TOL: f64 = 1e-10;
    let mut v = start_vector(x.ncols());
    let mut est = 0.0_f64;
    for _ in 0..MAX_ITER {
        let xv = x.dot(&v);
        let rayleigh = xv.dot(&xv);
        let next = transpose_matvec(x, xv.view());
        let norm = next.dot(&next).sqrt();
        let done = (rayleigh - est).abs() <= REL_TOL * rayleigh;
        est = rayleigh;
        if norm == 0.0 || done {
            break;
        }
        v = next / norm;
    }
    est
}

/// Lanczos on `XᵀX` with full reorthogonalization, stopped when the Ritz
/// residual of the top eigenpair is below `1e-10` relative.
fn lanczos_gram(x: &Array2<f64>) -> f64 {
    let n = x.ncols();
    let max_steps = n.min(400);
    let mut basis: Vec<Array1<f64>> = vec![start_vector(n)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    for j in 0..max_steps {
        let mut w = gram_apply(x, basis[j].view());
        let a = basis[j].dot(&w);
        alphas.push(a);
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dot(&w);
                w.scaled_add(-proj, q);
            }
        }
        let b = w.dot(&w).sqrt();
        let steps = alphas.len();
        if steps.is_multiple_of(5) || b <= 1e-14 * a.abs().max(1e-300) || j + 1 == max_steps {
            let t = nalgebra::DMatrix::from_fn(steps, steps, |r, c| {
                if r == c {
                    alphas[r]
                } else if r + 1 == c {
                    betas[r]
                } else if c + 1 == r {
                    betas[c]
                } else {
                    0.0
                }
            });
            let eig = nalgebra::SymmetricEigen::new(t);
            let (top, &value) = eig.eigenvalues.iter().enumerate().max_by(|p, q| p.1.total_cmp(q.1)).expect("nonempty tridiagonal");
            theta = value;
            let residual = b * eig.eigenvectors[(steps - 1, top)].abs();
            if residual <= 1e-10 * theta.abs() || b <= 1e-14 * a.abs().max(1e-300) {
                break;
            }
        }
        betas.push(b);
        basis.push(w / b);
    }
    theta
}

/// Step-size constant: `‖XᵀX‖₂` inflated by 1%.
pub fn lipschitz_constant(x: &Array2<f64>, method: LipschitzMethod) -> f64 {
    1.01 * spectral_norm_sq(x, method)
}

/// Next momentum scalar: the root in `(0, 1)` of `θ'²/θ² + θ' − 1 = 0`,
/// i.e. `(1 − θ')/θ'² = 1/θ²`.
pub fn theta_next(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Domain(format!("theta must lie in (0, 1], got {theta}")));
    }
    // (−θ² + θ√(θ² + 4))/2 without the cancellation
    Ok(2.0 * theta / (theta + (theta * theta + 4.0).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub kappa: f64,
    pub inner_tol: f64,
    /// Relative change of the objective between outer iterations.
    pub outer_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub lipschitz: Option<f64>,
    /// Start each inner solve from the previous fixed point instead of zero.
    pub warm_start: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { kappa: 0.2, inner_tol: 1e-2, outer_tol: 1e-8, max_outer: 10_000, max_inner: 10_000, lipschitz: None, warm_start: false }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.fixed_point().validate()?;
        if !(self.outer_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("outer tolerance must be positive, got {}", self.outer_tol)));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter("max_outer must be positive".into()));
        }
        if let Some(l) = self.lipschitz {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter(format!("Lipschitz constant must be positive, got {l}")));
            }
        }
        Ok(())
    }

    pub fn fixed_point(&self) -> FixedPointSettings {
        FixedPointSettings { kappa: self.kappa, tol: self.inner_tol, max_iter: self.max_inner }
    }
}

/// Outer-loop state: `u = (β, λ)`, the extrapolated point `w`, momentum
/// scalars and per-iteration history.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub beta: Array1<f64>,
    pub lambda: Array1<f64>,
    pub beta_prev: Array1<f64>,
    pub lambda_prev: Array1<f64>,
    pub w_beta: Array1<f64>,
    pub w_lambda: Array1<f64>,
    pub theta: f64,
    pub theta_prev: f64,
    pub pi: f64,
    pub t: usize,
    /// Objective at `u_1, u_2, …`.
    pub objective_history: Vec<f64>,
    pub inner_iteration_counts: Vec<usize>,
    /// Inner calls that hit `max_inner`.
    pub inner_nonconverged: usize,
    /// Last fixed point, reused as the next warm start.
    pub dual: Array1<f64>,
}

impl SolverState {
    pub fn mean_inner_iterations(&self) -> f64 {
        if self.inner_iteration_counts.is_empty() {
            return 0.0;
        }
        self.inner_iteration_counts.iter().sum::<usize>() as f64 / self.inner_iteration_counts.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub beta: Array1<f64>,
    pub lambda: Array1<f64>,
    pub state: SolverState,
    pub converged: bool,
    pub wall_time_ms: f64,
    pub lipschitz: f64,
}

impl SolveOutput {
    pub fn report(&self) -> SolveReport {
        SolveReport {
            schema_version: crate::SCHEMA_VERSION,
            beta: self.beta.to_vec(),
            lambda: self.lambda.to_vec(),
            objective_history: self.state.objective_history.clone(),
            inner_iteration_counts: self.state.inner_iteration_counts.clone(),
            converged: self.converged,
            wall_time_ms: self.wall_time_ms,
        }
    }
}

/// JSON form of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub beta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub objective_history: Vec<f64>,
    pub inner_iteration_counts: Vec<usize>,
    pub converged: bool,
    pub wall_time_ms: f64,
}

/// `½‖Xβ − y‖² + ρ Γ(β, λ)`; `+∞` when some `λᵢ = 0 ≠ βᵢ`.
pub fn gamma_objective(problem: &RegressionProblem, beta: ArrayView1<'_, f64>, lambda: ArrayView1<'_, f64>) -> f64 {
    problem.data_fit(beta) + problem.rho * gamma_penalty(beta, lambda)
}

/// `½‖Xβ − y‖² + ρ‖β‖₁`.
pub fn lasso_objective(problem: &RegressionProblem, beta: ArrayView1<'_, f64>) -> f64 {
    problem.data_fit(beta) + problem.rho * beta.iter().map(|b| b.abs()).sum::<f64>()
}

fn relative_change(prev: f64, next: f64) -> f64 {
    let diff = (prev - next).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / prev.abs().max(f64::MIN_POSITIVE)
    }
}

/// Accelerated proximal method with a Picard–Opial inner prox.
///
/// Starts from `β = 0`, `λ = 1` (feasible for every shipped set). Each step
/// takes a gradient step on the `β` block at `w`, applies the prox of
/// `(ρ/L) Γ` over `ℝⁿ × Λ` (from zero, or from the previous fixed point when
/// `warm_start` is set), then
/// extrapolates `w ← π u_{t+1} − (π − 1) u_t`.
pub fn nepio_solve(problem: &RegressionProblem, constraint: &ConstraintSet, config: &SolverConfig) -> Result<SolveOutput> {
    run_outer(problem, constraint, config, true)
}

/// The same loop with `w_t = u_t` (no momentum).
pub fn proximal_solve(problem: &RegressionProblem, constraint: &ConstraintSet, config: &SolverConfig) -> Result<SolveOutput> {
    run_outer(problem, constraint, config, false)
}

fn run_outer(problem: &RegressionProblem, constraint: &ConstraintSet, config: &SolverConfig, accelerate: bool) -> Result<SolveOutput> {
    config.validate()?;
    check_dim(problem.n(), constraint.dim())?;
    let start = Instant::now();
    let n = problem.n();
    let lipschitz = config.lipschitz.unwrap_or_else(|| lipschitz_constant(&problem.x, LipschitzMethod::default()));
    if !(lipschitz > 0.0) {
        return Err(Error::InvalidParameter("design matrix is zero".into()));
    }
    let rho_step = problem.rho / lipschitz;
    let settings = config.fixed_point();

    let beta = Array1::zeros(n);
    let lambda = Array1::ones(n);
    let first = gamma_objective(problem, beta.view(), lambda.view());
    let mut state = SolverState {
        beta_prev: beta.clone(),
        lambda_prev: lambda.clone(),
        w_beta: beta.clone(),
        w_lambda: lambda.clone(),
        beta,
        lambda,
        theta: 1.0,
        theta_prev: 1.0,
        pi: 1.0,
        t: 1,
        objective_history: vec![first],
        inner_iteration_counts: Vec::new(),
        inner_nonconverged: 0,
        dual: Array1::zeros(n + constraint.edge_map().rows()),
    };

    let mut converged = false;
    for _ in 0..config.max_outer {
        let grad = problem.gradient(state.w_beta.view());
        let alpha = &state.w_beta - &(grad / lipschitz);
        let pb = ProxProblem::new(alpha, state.w_lambda.clone(), rho_step, constraint)?;
        let warm = if config.warm_start { Some(state.dual.view()) } else { None };
        let out = prox_gamma(&pb, &settings, warm)?;
        state.inner_iteration_counts.push(out.state.iterations);
        if !out.state.converged {
            state.inner_nonconverged += 1;
        }
        state.dual = out.state.v;

        state.beta_prev = std::mem::replace(&mut state.beta, out.beta);
        state.lambda_prev = std::mem::replace(&mut state.lambda, out.lambda);
        state.t += 1;
        if accelerate {
            state.theta_prev = state.theta;
            state.theta = theta_next(state.theta)?;
            state.pi = 1.0 - state.theta + state.theta / state.theta_prev;
            let pi = state.pi;
            state.w_beta = extrapolate(&state.beta, &state.beta_prev, pi);
            state.w_lambda = extrapolate(&state.lambda, &state.lambda_prev, pi);
        } else {
            state.w_beta = state.beta.clone();
            state.w_lambda = state.lambda.clone();
        }

        let value = gamma_objective(problem, state.beta.view(), state.lambda.view());
        let prev = *state.objective_history.last().unwrap_or(&first);
        state.objective_history.push(value);
        if relative_change(prev, value) < config.outer_tol {
            converged = true;
            break;
        }
    }

    Ok(SolveOutput {
        beta: state.beta.clone(),
        lambda: state.lambda.clone(),
        converged,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        lipschitz,
        state,
    })
}

fn extrapolate(current: &Array1<f64>, previous: &Array1<f64>, pi: f64) -> Array1<f64> {
    let mut w = Array1::zeros(current.len());
    Zip::from(&mut w).and(current).and(previous).for_each(|w, &c, &p| *w = pi * c - (pi - 1.0) * p);
    w
}

pub fn soft_threshold(x: f64, level: f64) -> f64 {
    (x.abs() - level).max(0.0).copysign(x)
}

#[derive(Debug, Clone)]
pub struct LassoOutput {
    pub beta: Array1<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub objective_history: Vec<f64>,
}

/// FISTA with soft-thresholding at `ρ/L` and the same momentum sequence.
pub fn lasso_fista(problem: &RegressionProblem, config: &SolverConfig) -> Result<LassoOutput> {
    config.validate()?;
    let lipschitz = config.lipschitz.unwrap_or_else(|| lipschitz_constant(&problem.x, LipschitzMethod::default()));
    if !(lipschitz > 0.0) {
        return Err(Error::InvalidParameter("design matrix is zero".into()));
    }
    let level = problem.rho / lipschitz;
    let mut beta = Array1::zeros(problem.n());
    let mut w = beta.clone();
    let mut theta = 1.0;
    let mut history = vec![lasso_objective(problem, beta.view())];
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..config.max_outer {
        iterations += 1;
        let grad = problem.gradient(w.view());
        let next: Array1<f64> = Zip::from(&w).and(&grad).map_collect(|&wi, &gi| soft_threshold(wi - gi / lipschitz, level));
        let theta_prev = theta;
        theta = theta_next(theta)?;
        let pi = 1.0 - theta + theta / theta_prev;
        w = extrapolate(&next, &beta, pi);
        beta = next;
        let value = lasso_objective(problem, beta.view());
        let prev = *history.last().unwrap_or(&value);
        history.push(value);
        if relative_change(prev, value) < config.outer_tol {
            converged = true;
            break;
        }
    }
    Ok(LassoOutput { beta, converged, iterations, objective_history: history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::SimpleSet;
    use ndarray::array;

    #[test]
    fn theta_recursion() {
        let t2 = theta_next(1.0).unwrap();
        assert!((t2 - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        let mut theta = 1.0;
        for t in 1..=1000usize {
            let next = theta_next(theta).unwrap();
            // scale-free form of (1 − θ')/θ'² = 1/θ²
            let residual = next * next / (theta * theta) + next - 1.0;
            assert!(residual.abs() < 1e-12, "step {t}: {residual}");
            if t <= 100 {
                let raw = (1.0 - next) / (next * next) - 1.0 / (theta * theta);
                assert!(raw.abs() < 1e-12 * (1.0 / (theta * theta)).max(1.0));
            }
            assert!(theta <= 2.0 / (t as f64 + 1.0) + 1e-15, "θ_{t} = {theta}");
            let pi = 1.0 - next + next / theta;
            assert!((pi - (1.0 - next + (1.0 - next).sqrt())).abs() < 1e-12);
            theta = next;
        }
        assert!(theta_next(0.0).is_err());
        assert!(theta_next(1.5).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        let eye = Array2::<f64>::eye(4);
        assert!((spectral_norm_sq(&eye, LipschitzMethod::PowerIteration) - 1.0).abs() < 1e-12);
        assert!((lipschitz_constant(&eye, LipschitzMethod::ExactSvd) - 1.01).abs() < 1e-12);
        let two = &eye * 2.0;
        assert!((spectral_norm_sq(&two, LipschitzMethod::ExactSvd) - 4.0).abs() < 1e-12);
        assert!((spectral_norm_sq(&two, LipschitzMethod::PowerIteration) - 4.0).abs() < 1e-12);
        assert!((spectral_norm_sq(&two, LipschitzMethod::Lanczos) - 4.0).abs() < 1e-12);
        let x = array![[1.0, 2.0], [3.0, 4.0], [0.5, -1.0]];
        let exact = spectral_norm_sq(&x, LipschitzMethod::ExactSvd);
        for method in [LipschitzMethod::PowerIteration, LipschitzMethod::Lanczos] {
            assert!((spectral_norm_sq(&x, method) - exact).abs() < 1e-9 * exact);
        }
    }

    #[test]
    fn objective_conventions() {
        let pb = RegressionProblem::new(Array2::eye(3), array![1.0, 2.0, 2.0], 1.0).unwrap();
        let zero = Array1::zeros(3);
        assert_eq!(gamma_objective(&pb, zero.view(), zero.view()), 4.5);
        let pb0 = RegressionProblem::new(Array2::eye(3), Array1::zeros(3), 1.0).unwrap();
        assert_eq!(gamma_objective(&pb0, zero.view(), Array1::ones(3).view()), 1.5);
        let beta = array![0.5, -1.0, 0.0];
        let tight = beta.mapv(f64::abs);
        let expected = pb.data_fit(beta.view()) + 1.5;
        assert!((gamma_objective(&pb, beta.view(), tight.view()) - expected).abs() < 1e-12);
        assert_eq!(gamma_objective(&pb, beta.view(), zero.view()), f64::INFINITY);
    }

    #[test]
    fn zero_response_gives_zero() {
        let x = array![[1.0, 0.5, -0.2], [0.3, -1.0, 0.8], [0.0, 0.4, 1.1], [0.9, 0.1, 0.2]];
        let pb = RegressionProblem::new(x, Array1::zeros(4), 0.5).unwrap();
        let set = ConstraintSet::grid_1d(3, SimpleSet::L1Ball { radius: 1.0 }).unwrap();
        let out = nepio_solve(&pb, &set, &SolverConfig::default()).unwrap();
        assert!(out.converged);
        assert!(out.beta.iter().all(|&b| b == 0.0));
        assert!(out.lambda.iter().all(|&l| l.abs() < 1e-6), "{:?}", out.lambda);
        let lasso = lasso_fista(&pb, &SolverConfig::default()).unwrap();
        assert!(lasso.beta.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn orthonormal_lasso_is_soft_threshold() {
        // columns of a rotation are orthonormal
        let (c, s) = (0.6, 0.8);
        let x = array![[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let y = array![2.0, -1.0, 0.3];
        let pb = RegressionProblem::new(x.clone(), y.clone(), 0.5).unwrap();
        let config = SolverConfig { outer_tol: 1e-15, ..Default::default() };
        let out = lasso_fista(&pb, &config).unwrap();
        let xty = x.t().dot(&y);
        for i in 0..3 {
            assert!((out.beta[i] - soft_threshold(xty[i], 0.5)).abs() < 1e-8);
        }
    }

    #[test]
    fn problem_json() {
        let text = r#"{"X": [[1, 2], [3, 4], [5, 6]], "y": [1, 0, 1], "rho": 0.1}"#;
        let pb = RegressionProblem::from_json(text).unwrap();
        assert_eq!(pb.x, array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
        let again = RegressionProblem::from_json(&pb.to_json().unwrap()).unwrap();
        assert_eq!(again.x, pb.x);
        assert!(RegressionProblem::from_json(r#"{"X": [[1, 2], [3]], "y": [1, 0], "rho": 0.1}"#).is_err());
        assert!(RegressionProblem::from_json(r#"{"X": [[1, 2]], "y": [1, 0], "rho": 0.1}"#).is_err());
        assert!(RegressionProblem::from_json(r#"{"X": [[1, 2]], "y": [1], "rho": -1}"#).is_err());
    }

    #[test]
    fn max_outer_flags() {
        let x = array![[1.0, 0.5], [0.3, -1.0], [0.2, 0.4]];
        let pb = RegressionProblem::new(x, array![1.0, -1.0, 0.5], 0.1).unwrap();
        let set = ConstraintSet::grid_1d(2, SimpleSet::L1Ball { radius: 1.0 }).unwrap();
        let out = nepio_solve(&pb, &set, &SolverConfig { max_outer: 1, ..Default::default() }).unwrap();
        assert!(!out.converged);
        assert_eq!(out.state.objective_history.len(), 2);
    }
}
