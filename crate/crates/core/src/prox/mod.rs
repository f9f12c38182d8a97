//! Proximity operator of `ρΓ` restricted to `ℝⁿ × Λ`.
//!
//! For fixed `λ` the `β`-block has the closed form [`beta_from_lambda`], which
//! leaves a problem in `λ` alone: the prox of `φ ∘ B` at `μ`, where
//! `Bᵀ = [I, Aᵀ]`, `φ(s, t) = φ₁(s) + δ_S(t)` and
//! `φ₁(s) = (ρ/2) Σ (αᵢ²/(sᵢ + ρ) + sᵢ)` on `s ≥ 0`. That prox is recovered
//! from a fixed point `v̂` of
//!
//! ```text
//! H(v) = (I − prox_{φ/c}) ((I − c B Bᵀ) v + B μ)
//! ```
//!
//! computed by the averaged iteration `v ← κ v + (1 − κ) H(v)`.

mod cubic;

pub use cubic::{cubic_prox_objective, cubic_prox_polynomial, cubic_prox_scalar, largest_real_root_monic};

use ndarray::{Array1, ArrayView1};

use crate::error::{check_dim, Error, Result};
use crate::sets::{ConstraintSet, EdgeMap};

/// `Γ(β, λ) = ½ Σ (βᵢ²/λᵢ + λᵢ)` with `0/0 = 0` and `βᵢ²/0 = +∞` for `βᵢ ≠ 0`.
pub fn gamma_penalty(beta: ArrayView1<'_, f64>, lambda: ArrayView1<'_, f64>) -> f64 {
    let mut total = 0.0;
    for (&b, &l) in beta.iter().zip(lambda.iter()) {
        if l <= 0.0 {
            if b != 0.0 || l < 0.0 {
                return f64::INFINITY;
            }
        } else {
            total += b * b / l + l;
        }
    }
    0.5 * total
}

/// `βᵢ = αᵢ λᵢ / (λᵢ + ρ)`, the minimizing `β` for fixed `λ`.
pub fn beta_from_lambda(alpha: ArrayView1<'_, f64>, lambda: ArrayView1<'_, f64>, rho: f64) -> Result<Array1<f64>> {
    check_dim(alpha.len(), lambda.len())?;
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if let Some((i, l)) = lambda.iter().enumerate().find(|(_, &l)| l < 0.0 || l.is_nan()) {
        return Err(Error::Domain(format!("lambda[{i}] = {l} is negative")));
    }
    Ok(alpha.iter().zip(lambda.iter()).map(|(&a, &l)| if l == 0.0 { 0.0 } else { a * l / (l + rho) }).collect())
}

/// One prox instance: the point `(α, μ)`, the weight `ρ`, the set `Λ` and the
/// fixed-point constant `c`.
#[derive(Debug, Clone)]
pub struct ProxProblem<'a> {
    pub alpha: Array1<f64>,
    pub mu: Array1<f64>,
    pub rho: f64,
    pub constraint: &'a ConstraintSet,
    pub c: f64,
}

impl<'a> ProxProblem<'a> {
    /// Uses `c = 1/‖B‖²` with the cached norm estimate of the constraint set.
    pub fn new(alpha: Array1<f64>, mu: Array1<f64>, rho: f64, constraint: &'a ConstraintSet) -> Result<Self> {
        check_dim(constraint.dim(), alpha.len())?;
        check_dim(constraint.dim(), mu.len())?;
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
        }
        let c = 1.0 / constraint.composite_norm_sq();
        Ok(Self { alpha, mu, rho, constraint, c })
    }

    /// Overrides `c`; it must lie in `(0, 2/‖B‖²]` for `H` to be nonexpansive.
    pub fn with_c(mut self, c: f64) -> Result<Self> {
        let limit = 2.0 / self.constraint.composite_norm_sq();
        if !(c > 0.0 && c <= limit) {
            return Err(Error::InvalidParameter(format!("c = {c} outside (0, {limit}]")));
        }
        self.c = c;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.constraint.dim()
    }

    pub fn k(&self) -> usize {
        self.constraint.edge_map().rows()
    }

    /// Length of the fixed-point variable, `n + k`.
    pub fn d(&self) -> usize {
        self.n() + self.k()
    }

    /// The weight `r` of the scalar cubic prox inside `prox_{φ/c}`.
    pub fn phi1_weight(&self) -> f64 {
        self.rho / self.c
    }

    /// `½‖(β, λ) − (α, μ)‖² + ρ Γ(β, λ)`.
    pub fn objective(&self, beta: ArrayView1<'_, f64>, lambda: ArrayView1<'_, f64>) -> f64 {
        let db: f64 = beta.iter().zip(self.alpha.iter()).map(|(b, a)| (b - a) * (b - a)).sum();
        let dl: f64 = lambda.iter().zip(self.mu.iter()).map(|(l, m)| (l - m) * (l - m)).sum();
        0.5 * (db + dl) + self.rho * gamma_penalty(beta, lambda)
    }
}

/// The `(n + k) × n` map `B` with `Bᵀ = [I, Aᵀ]`.
#[derive(Debug, Clone, Copy)]
pub struct CompositeMap<'a> {
    edge_map: &'a EdgeMap,
}

impl<'a> CompositeMap<'a> {
    pub fn new(edge_map: &'a EdgeMap) -> Self {
        Self { edge_map }
    }

    pub fn dim(&self) -> usize {
        self.edge_map.cols()
    }

    pub fn total_rows(&self) -> usize {
        self.edge_map.cols() + self.edge_map.rows()
    }

    /// `B x = (x, A x)`.
    pub fn apply(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_dim(self.dim(), x.len())?;
        let n = self.dim();
        let mut out = vec![0.0; self.total_rows()];
        let x = x.to_vec();
        out[..n].copy_from_slice(&x);
        self.edge_map.apply_into(&x, &mut out[n..]);
        Ok(Array1::from(out))
    }

    /// `Bᵀ v = v_s + Aᵀ v_t`.
    pub fn apply_transpose(&self, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_dim(self.total_rows(), v.len())?;
        let n = self.dim();
        let v = v.to_vec();
        let mut out = v[..n].to_vec();
        self.edge_map.add_transpose_into(&v[n..], 1.0, &mut out);
        Ok(Array1::from(out))
    }
}

/// Componentwise cubic prox: `s'ᵢ = argmin_{x ≥ 0} (x − sᵢ)² + r (αᵢ²/(x + ρ) + x)`.
pub fn prox_phi1(s_in: ArrayView1<'_, f64>, alpha: ArrayView1<'_, f64>, rho: f64, r: f64) -> Result<Array1<f64>> {
    check_dim(alpha.len(), s_in.len())?;
    if !(rho > 0.0 && r > 0.0) {
        return Err(Error::InvalidParameter(format!("need rho > 0 and r > 0, got rho={rho}, r={r}")));
    }
    Ok(s_in.iter().zip(alpha.iter()).map(|(&s, &a)| cubic_prox_scalar(s, a, r, rho)).collect())
}

/// Like [`prox_phi1`], using the current contents of `out` as root hints.
fn prox_phi1_into(s_in: &[f64], alpha: &[f64], rho: f64, r: f64, out: &mut [f64]) {
    for ((o, &s), &a) in out.iter_mut().zip(s_in).zip(alpha) {
        *o = cubic::cubic_prox_scalar_near(s, a, r, rho, *o);
    }
}

/// `prox_{φ/c}(s, t) = (prox_{φ₁/c}(s), P_S(t))`.
pub fn prox_phi(s: ArrayView1<'_, f64>, t: ArrayView1<'_, f64>, problem: &ProxProblem<'_>) -> Result<(Array1<f64>, Array1<f64>)> {
    check_dim(problem.n(), s.len())?;
    check_dim(problem.k(), t.len())?;
    let s_out = prox_phi1(s, problem.alpha.view(), problem.rho, problem.phi1_weight())?;
    let t_out = problem.constraint.simple_set().project(t);
    Ok((s_out, t_out))
}

/// Parameters of the averaged fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSettings {
    pub kappa: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointSettings {
    fn default() -> Self {
        Self { kappa: 0.2, tol: 1e-2, max_iter: 10_000 }
    }
}

impl FixedPointSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::InvalidParameter(format!("kappa must lie in (0, 1), got {}", self.kappa)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointState {
    pub v: Array1<f64>,
    pub iterations: usize,
    /// Relative change between the last two iterates.
    pub residual: f64,
    pub converged: bool,
}

/// Evaluates `H` with reusable scratch space. After [`FixedPointMap::eval`],
/// `prox_block()` holds `prox_{φ/c}` of the shifted point.
struct FixedPointMap<'p, 'a> {
    problem: &'p ProxProblem<'a>,
    alpha: &'p [f64],
    mu: &'p [f64],
    w: Vec<f64>,
    z: Vec<f64>,
    p: Vec<f64>,
}

impl<'p, 'a> FixedPointMap<'p, 'a> {
    fn new(problem: &'p ProxProblem<'a>) -> Self {
        let (n, d) = (problem.n(), problem.d());
        Self {
            problem,
            alpha: problem.alpha.as_slice().expect("contiguous alpha"),
            mu: problem.mu.as_slice().expect("contiguous mu"),
            w: vec![0.0; n],
            z: vec![0.0; d],
            p: vec![0.0; d],
        }
    }

    fn eval(&mut self, v: &[f64], out: &mut [f64]) {
        let pb = self.problem;
        let n = pb.n();
        let a = pb.constraint.edge_map();
        let (v_s, v_t) = v.split_at(n);

        // w = μ − c Bᵀ v, the λ estimate carried by v
        for ((w, &m), &vs) in self.w.iter_mut().zip(self.mu).zip(v_s) {
            *w = m - pb.c * vs;
        }
        a.add_transpose_into(v_t, -pb.c, &mut self.w);

        // z = (I − c B Bᵀ) v + B μ = v + B w
        let (z_s, z_t) = self.z.split_at_mut(n);
        for ((z, &vs), &w) in z_s.iter_mut().zip(v_s).zip(&self.w) {
            *z = vs + w;
        }
        a.apply_into(&self.w, z_t);
        for (z, &vt) in z_t.iter_mut().zip(v_t) {
            *z += vt;
        }

        let (p_s, p_t) = self.p.split_at_mut(n);
        prox_phi1_into(z_s, self.alpha, pb.rho, pb.phi1_weight(), p_s);
        p_t.copy_from_slice(z_t);
        pb.constraint.simple_set().project_in_place(p_t);

        for ((o, &z), &p) in out.iter_mut().zip(&self.z).zip(&self.p) {
            *o = z - p;
        }
    }

    fn prox_block(&self) -> &[f64] {
        &self.p[..self.problem.n()]
    }
}

/// `H(v)` for a single point.
pub fn h_map(problem: &ProxProblem<'_>, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    check_dim(problem.d(), v.len())?;
    let mut map = FixedPointMap::new(problem);
    let mut out = vec![0.0; problem.d()];
    map.eval(&v.to_vec(), &mut out);
    Ok(Array1::from(out))
}

/// `(I − prox_{φ/c})(z)` for `z = (s, t)`.
pub fn prox_phi_complement(problem: &ProxProblem<'_>, z: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    check_dim(problem.d(), z.len())?;
    let n = problem.n();
    let (s, t) = prox_phi(z.slice(ndarray::s![..n]), z.slice(ndarray::s![n..]), problem)?;
    let mut out = z.to_owned();
    for (o, p) in out.iter_mut().zip(s.iter().chain(t.iter())) {
        *o -= p;
    }
    Ok(out)
}

/// `μ − c Bᵀ v`, the prox read directly off a fixed point.
pub fn lambda_from_dual(problem: &ProxProblem<'_>, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    let btv = CompositeMap::new(problem.constraint.edge_map()).apply_transpose(v)?;
    Ok(&problem.mu - &(btv * problem.c))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Runs `v_{s+1} = κ v_s + (1 − κ) H(v_s)` from `v0` (zeros when `None`) until
/// `‖v_{s+1} − v_s‖ / max(‖v_s‖, 1e-12) ≤ tol`. Hitting `max_iter` returns the
/// last iterate with `converged = false`.
pub fn picard_opial_fixed_point(
    problem: &ProxProblem<'_>,
    v0: Option<ArrayView1<'_, f64>>,
    settings: &FixedPointSettings,
) -> Result<FixedPointState> {
    settings.validate()?;
    let d = problem.d();
    let mut v = match v0 {
        Some(v0) => {
            check_dim(d, v0.len())?;
            v0.to_vec()
        }
        None => vec![0.0; d],
    };
    let mut map = FixedPointMap::new(problem);
    let (state, _) = iterate(&mut map, &mut v, settings);
    Ok(state)
}

fn iterate(map: &mut FixedPointMap<'_, '_>, v: &mut [f64], settings: &FixedPointSettings) -> (FixedPointState, bool) {
    let kappa = settings.kappa;
    let mut hv = vec![0.0; v.len()];
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < settings.max_iter {
        map.eval(v, &mut hv);
        iterations += 1;
        let prev_norm = norm(v);
        let mut change = 0.0;
        for (x, &h) in v.iter_mut().zip(&hv) {
            let next = kappa * *x + (1.0 - kappa) * h;
            change += (next - *x) * (next - *x);
            *x = next;
        }
        residual = change.sqrt() / prev_norm.max(1e-12);
        if residual <= settings.tol {
            converged = true;
            break;
        }
    }
    let state = FixedPointState { v: Array1::from(v.to_vec()), iterations, residual, converged };
    (state, converged)
}

/// Result of [`prox_gamma`].
#[derive(Debug, Clone)]
pub struct ProxOutput {
    pub beta: Array1<f64>,
    pub lambda: Array1<f64>,
    pub state: FixedPointState,
}

/// `argmin { ½‖(β, λ) − (α, μ)‖² + ρ Γ(β, λ) : λ ∈ Λ }`.
///
/// `λ` is read out as the `φ₁`-prox block of the shifted point at `v̂`, which
/// equals `μ − c Bᵀ v̂` at an exact fixed point and is always nonnegative with
/// exact zeros. `β` follows from [`beta_from_lambda`].
pub fn prox_gamma(problem: &ProxProblem<'_>, settings: &FixedPointSettings, warm_start: Option<ArrayView1<'_, f64>>) -> Result<ProxOutput> {
    settings.validate()?;
    let d = problem.d();
    let mut v = match warm_start {
        Some(v0) => {
            check_dim(d, v0.len())?;
            v0.to_vec()
        }
        None => vec![0.0; d],
    };
    let mut map = FixedPointMap::new(problem);
    let (state, _) = iterate(&mut map, &mut v, settings);
    let mut scratch = vec![0.0; d];
    map.eval(&v, &mut scratch);
    let lambda = Array1::from(map.prox_block().to_vec());
    let beta = beta_from_lambda(problem.alpha.view(), lambda.view(), problem.rho)?;
    Ok(ProxOutput { beta, lambda, state })
}
