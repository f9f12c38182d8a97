//! Synthetic experiment protocols: 1D and 2D contiguous-region recovery,
//! prox scaling on 2D grids, and a tree-sparse Haar wavelet model.
//!
//! A cell is one `(m, run)` pair (one `(side, run)` pair for `scaling`). The
//! model, design and response of a cell come from [`data::cell_rng`] seeded
//! with the spec seed and the cell coordinates, so every method in a cell
//! sees the same data and cells can run in any order.

pub mod bench;
pub mod data;
pub mod haar;

use std::io::Write;
use std::time::Instant;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_collect, Execution};
use crate::sets::{ConstraintSet, EdgeMap, SimpleSet};
use crate::solver::{lasso_fista, lipschitz_constant, nepio_solve, transpose_matvec, LipschitzMethod, RegressionProblem, SolverConfig};

pub use data::RegionShape2d;
use data::{cell_rng, gaussian_design, generate_output, make_region_model_1d, make_region_model_2d, model_error, noise_std_for_snr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Regions1d,
    Regions2d,
    Scaling,
    WaveletTree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lasso,
    GridC,
    TreeC,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lasso => "lasso",
            Method::GridC => "grid_c",
            Method::TreeC => "tree_c",
        }
    }
}

/// How `(ρ, α)` is picked from the grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Smallest true model error.
    #[default]
    Oracle,
    /// Fit on a random 80% of the rows, score squared error on the rest.
    Validation,
}

fn default_rho_grid() -> Vec<f64> {
    log_space(1e-4, 10.0, 8)
}

fn default_alpha_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0]
}

/// Declarative experiment description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "crate::schema_version")]
    pub schema_version: u32,
    pub kind: ExperimentKind,
    /// Length of β for `regions1d`.
    #[serde(default)]
    pub n: Option<usize>,
    /// Grid shape for `regions2d`, or the image side for `wavelet_tree`.
    #[serde(default)]
    pub rows: Option<usize>,
    #[serde(default)]
    pub cols: Option<usize>,
    #[serde(default)]
    pub region_shape: Option<RegionShape2d>,
    /// Nonzeros of β* (`regions1d`) or kept wavelet coefficients.
    #[serde(default)]
    pub sparsity: usize,
    #[serde(default)]
    pub region_count: usize,
    /// Sample sizes. Ignored by `scaling`, which uses `m = n / 4`.
    #[serde(default)]
    pub sample_sizes: Vec<usize>,
    /// Image sides for `scaling`; each gives an `n = side²` grid.
    #[serde(default)]
    pub grid_sides: Vec<usize>,
    pub runs: usize,
    #[serde(default)]
    pub noise_std: f64,
    /// If set, overrides `noise_std` per cell to hit this SNR on `Xβ*`.
    #[serde(default)]
    pub snr_db: Option<f64>,
    /// Multipliers of `‖Xᵀy‖∞ / m`.
    #[serde(default = "default_rho_grid")]
    pub rho_grid: Vec<f64>,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub selection: Selection,
    #[serde(default)]
    pub solver: SolverConfig,
}

/// Outer-iteration cap of the presets. Sweeps over tiny `ρ` otherwise spend
/// most of their time on fits that are never selected.
pub const PRESET_MAX_OUTER: usize = 2000;

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count).map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)).collect()
}

impl ExperimentSpec {
    /// Named desk-scale presets: `regions1d`, `regions2d`, `scaling`, `wavelet_tree`.
    pub fn preset(name: &str) -> Result<Self> {
        let base = |kind, methods| ExperimentSpec {
            schema_version: crate::SCHEMA_VERSION,
            kind,
            n: None,
            rows: None,
            cols: None,
            region_shape: None,
            sparsity: 0,
            region_count: 0,
            sample_sizes: Vec::new(),
            grid_sides: Vec::new(),
            runs: 10,
            noise_std: 0.0,
            snr_db: None,
            rho_grid: default_rho_grid(),
            alpha_grid: default_alpha_grid(),
            methods,
            seed: 0,
            selection: Selection::Oracle,
            solver: SolverConfig { max_outer: PRESET_MAX_OUTER, ..SolverConfig::default() },
        };
        match name {
            "regions1d" => Ok(ExperimentSpec {
                n: Some(200),
                sparsity: 20,
                region_count: 2,
                sample_sizes: vec![22, 40, 60, 80, 100],
                ..base(ExperimentKind::Regions1d, vec![Method::Lasso, Method::GridC])
            }),
            "regions2d" => Ok(ExperimentSpec {
                rows: Some(20),
                cols: Some(20),
                region_shape: Some(RegionShape2d::Two4x4And3x3),
                sparsity: RegionShape2d::Two4x4And3x3.sparsity(),
                sample_sizes: vec![30, 50, 75, 100, 125],
                ..base(ExperimentKind::Regions2d, vec![Method::Lasso, Method::GridC])
            }),
            "scaling" => Ok(ExperimentSpec {
                region_shape: Some(RegionShape2d::Two4x4And3x3),
                grid_sides: vec![16, 32, 64],
                runs: 3,
                // a small ρ keeps the prox near the identity and the inner
                // counts at their floor
                rho_grid: vec![10.0],
                alpha_grid: vec![1.0],
                ..base(ExperimentKind::Scaling, vec![Method::GridC])
            }),
            "wavelet_tree" => Ok(ExperimentSpec {
                rows: Some(16),
                cols: Some(16),
                sparsity: 24,
                sample_sizes: vec![72],
                runs: 5,
                snr_db: Some(20.0),
                ..base(ExperimentKind::WaveletTree, vec![Method::Lasso, Method::TreeC])
            }),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        if spec.schema_version != crate::SCHEMA_VERSION {
            return Err(Error::SchemaVersion(spec.schema_version));
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn side(&self) -> Result<(usize, usize)> {
        match (self.rows, self.cols) {
            (Some(r), Some(c)) if r > 0 && c > 0 => Ok((r, c)),
            _ => Err(Error::InvalidParameter(format!("{:?} needs positive rows and cols", self.kind))),
        }
    }

    /// Length of β for the non-scaling kinds.
    pub fn dimension(&self) -> Result<usize> {
        match self.kind {
            ExperimentKind::Regions1d => self.n.filter(|&n| n > 0).ok_or_else(|| Error::InvalidParameter("regions1d needs n".into())),
            ExperimentKind::Regions2d | ExperimentKind::WaveletTree => self.side().map(|(r, c)| r * c),
            ExperimentKind::Scaling => Err(Error::InvalidParameter("scaling has one dimension per grid side".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.runs == 0 {
            return Err(Error::InvalidParameter("runs must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods".into()));
        }
        if self.rho_grid.is_empty() || self.rho_grid.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidParameter("rho grid must be non-empty and positive".into()));
        }
        if self.methods.contains(&Method::GridC)
            && (self.alpha_grid.is_empty() || self.alpha_grid.iter().any(|&a| !(a > 0.0 && a.is_finite())))
        {
            return Err(Error::InvalidParameter("alpha grid must be non-empty and positive".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise_std must be non-negative, got {}", self.noise_std)));
        }
        let structured = if self.kind == ExperimentKind::WaveletTree { Method::TreeC } else { Method::GridC };
        let wrong = if structured == Method::TreeC { Method::GridC } else { Method::TreeC };
        if self.methods.contains(&wrong) {
            return Err(Error::InvalidParameter(format!("{} does not apply to {:?}", wrong.name(), self.kind)));
        }
        match self.kind {
            ExperimentKind::Scaling => {
                if self.grid_sides.is_empty() || self.grid_sides.iter().any(|&s| s < 4) {
                    return Err(Error::InvalidParameter("scaling needs grid sides of at least 4".into()));
                }
                if self.region_shape.is_none() {
                    return Err(Error::InvalidParameter("scaling needs a region shape".into()));
                }
                return Ok(());
            }
            ExperimentKind::Regions1d => {
                if self.region_count == 0 {
                    return Err(Error::InvalidParameter("region_count must be positive".into()));
                }
            }
            ExperimentKind::Regions2d => {
                if self.region_shape.is_none() {
                    return Err(Error::InvalidParameter("regions2d needs a region shape".into()));
                }
            }
            ExperimentKind::WaveletTree => {
                let (r, c) = self.side()?;
                if r != c || !r.is_power_of_two() {
                    return Err(Error::InvalidDimension(format!("wavelet image must be square with power-of-two side, got {r}x{c}")));
                }
            }
        }
        let n = self.dimension()?;
        if self.sparsity > n {
            return Err(Error::InvalidParameter(format!("sparsity {} exceeds n = {n}", self.sparsity)));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return Err(Error::InvalidParameter("sample sizes must be non-empty and positive".into()));
        }
        Ok(())
    }
}

/// One row of the output CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub method: Method,
    pub m: usize,
    pub run: usize,
    pub model_error: f64,
    /// Wall time of the selected fit.
    pub wall_time_ms: f64,
    /// Mean Picard–Opial iterations per outer step; 0 for the Lasso.
    pub inner_iters_mean: f64,
    pub rho_selected: f64,
    pub alpha_selected: Option<f64>,
    /// Whether the selected fit met its outer tolerance. Not written to CSV.
    #[serde(skip, default = "default_true")]
    pub converged: bool,
}

fn default_true() -> bool {
    true
}

/// One cell's data.
struct Cell {
    m: usize,
    run: usize,
    x: Array2<f64>,
    y: Array1<f64>,
    beta_star: Array1<f64>,
    structure: Structure,
    /// Row permutation for validation splits.
    rng: ChaCha8Rng,
}

enum Structure {
    Grid(EdgeMap),
    Tree(EdgeMap),
}

struct Fit {
    beta: Array1<f64>,
    wall_time_ms: f64,
    inner_iters_mean: f64,
    converged: bool,
}

fn fit(method: Method, problem: &RegressionProblem, structure: &Structure, alpha: f64, config: &SolverConfig) -> Result<Fit> {
    match (method, structure) {
        (Method::Lasso, _) => {
            let start = Instant::now();
            let out = lasso_fista(problem, config)?;
            Ok(Fit { beta: out.beta, wall_time_ms: start.elapsed().as_secs_f64() * 1e3, inner_iters_mean: 0.0, converged: out.converged })
        }
        (Method::GridC, Structure::Grid(edges)) => {
            let set = ConstraintSet::new(edges.clone(), SimpleSet::L1Ball { radius: alpha })?;
            let out = nepio_solve(problem, &set, config)?;
            let inner = out.state.mean_inner_iterations();
            Ok(Fit { beta: out.beta, wall_time_ms: out.wall_time_ms, inner_iters_mean: inner, converged: out.converged })
        }
        (Method::TreeC, Structure::Tree(edges)) => {
            let set = ConstraintSet::new(edges.clone(), SimpleSet::NonnegativeOrthant)?;
            let out = nepio_solve(problem, &set, config)?;
            let inner = out.state.mean_inner_iterations();
            Ok(Fit { beta: out.beta, wall_time_ms: out.wall_time_ms, inner_iters_mean: inner, converged: out.converged })
        }
        (method, _) => Err(Error::InvalidParameter(format!("{} does not match the cell structure", method.name()))),
    }
}

fn build_cell(spec: &ExperimentSpec, key: usize, run: usize) -> Result<Cell> {
    let mut rng = cell_rng(spec.seed, &[key as u64, run as u64]);
    let (m, beta_star, structure) = match spec.kind {
        ExperimentKind::Regions1d => {
            let n = spec.dimension()?;
            let beta = make_region_model_1d(n, spec.region_count, spec.sparsity, &mut rng)?;
            (key, beta, Structure::Grid(crate::sets::grid_edge_map_1d(n)?))
        }
        ExperimentKind::Regions2d => {
            let (r, c) = spec.side()?;
            let shape = spec.region_shape.ok_or_else(|| Error::InvalidParameter("missing region shape".into()))?;
            let beta = make_region_model_2d(r, c, shape, &mut rng)?;
            (key, beta, Structure::Grid(crate::sets::grid_edge_map_2d(r, c)?))
        }
        ExperimentKind::Scaling => {
            let side = key;
            let shape = spec.region_shape.ok_or_else(|| Error::InvalidParameter("missing region shape".into()))?;
            let beta = make_region_model_2d(side, side, shape, &mut rng)?;
            ((side * side / 4).max(1), beta, Structure::Grid(crate::sets::grid_edge_map_2d(side, side)?))
        }
        ExperimentKind::WaveletTree => {
            let (side, _) = spec.side()?;
            let (beta, tree) = haar::haar_tree_setup(side, spec.sparsity, &mut rng)?;
            (key, beta, Structure::Tree(tree))
        }
    };
    let x = gaussian_design(m, beta_star.len(), &mut rng);
    let noise = match spec.snr_db {
        Some(db) => noise_std_for_snr(&x.dot(&beta_star), db),
        None => spec.noise_std,
    };
    let y = generate_output(&x, &beta_star, noise, &mut rng);
    Ok(Cell { m, run, x, y, beta_star, structure, rng })
}

fn rho_scale(x: &Array2<f64>, y: &Array1<f64>) -> f64 {
    let corr = transpose_matvec(x, y.view());
    let max = corr.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    max / x.nrows() as f64
}

fn run_cell(spec: &ExperimentSpec, mut cell: Cell) -> Result<Vec<ResultRecord>> {
    let scale = rho_scale(&cell.x, &cell.y);
    // validation split, or the whole sample for oracle selection
    let (train_x, train_y, held) = match spec.selection {
        Selection::Oracle => (cell.x.clone(), cell.y.clone(), None),
        Selection::Validation => {
            let mut rows: Vec<usize> = (0..cell.m).collect();
            rows.shuffle(&mut cell.rng);
            let cut = ((cell.m as f64) * 0.8).round().clamp(1.0, (cell.m - 1).max(1) as f64) as usize;
            let (fit_rows, held_rows) = rows.split_at(cut);
            let held = (!held_rows.is_empty()).then(|| (cell.x.select(Axis(0), held_rows), cell.y.select(Axis(0), held_rows)));
            (cell.x.select(Axis(0), fit_rows), cell.y.select(Axis(0), fit_rows), held)
        }
    };
    let lipschitz = lipschitz_constant(&train_x, LipschitzMethod::default());
    let config = SolverConfig { lipschitz: Some(spec.solver.lipschitz.unwrap_or(lipschitz)), ..spec.solver };

    let mut records = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let alphas: &[f64] = if method == Method::GridC { &spec.alpha_grid } else { &[f64::NAN] };
        let mut best: Option<(f64, f64, f64, Fit)> = None;
        for &mult in &spec.rho_grid {
            let rho = mult * scale;
            let problem = RegressionProblem::new(train_x.clone(), train_y.clone(), rho)?;
            for &alpha in alphas {
                let result = fit(method, &problem, &cell.structure, alpha, &config)?;
                let score = match (&held, spec.selection) {
                    (Some((hx, hy)), Selection::Validation) => {
                        let r = hx.dot(&result.beta) - hy;
                        r.dot(&r)
                    }
                    _ => model_error(&result.beta, &cell.beta_star),
                };
                if best.as_ref().is_none_or(|b| score < b.0) {
                    best = Some((score, rho, alpha, result));
                }
            }
        }
        let (_, rho, alpha, result) = best.ok_or_else(|| Error::InvalidParameter("empty hyperparameter grid".into()))?;
        records.push(ResultRecord {
            method,
            m: cell.m,
            run: cell.run,
            model_error: model_error(&result.beta, &cell.beta_star),
            wall_time_ms: result.wall_time_ms,
            inner_iters_mean: result.inner_iters_mean,
            rho_selected: rho,
            alpha_selected: (method == Method::GridC).then_some(alpha),
            converged: result.converged,
        });
    }
    Ok(records)
}

/// Runs every `(m, run)` cell and returns records ordered by `m`, run, then
/// the order of `spec.methods`. Solver non-convergence is recorded in
/// [`ResultRecord::converged`] and is not an error.
pub fn run_experiment(spec: &ExperimentSpec, execution: Execution) -> Result<Vec<ResultRecord>> {
    spec.validate()?;
    let keys: &[usize] = if spec.kind == ExperimentKind::Scaling { &spec.grid_sides } else { &spec.sample_sizes };
    let cells: Vec<(usize, usize)> = keys.iter().flat_map(|&k| (0..spec.runs).map(move |r| (k, r))).collect();
    let results = map_collect(&cells, execution, |&(key, run)| build_cell(spec, key, run).and_then(|cell| run_cell(spec, cell)));
    let mut out = Vec::with_capacity(cells.len() * spec.methods.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

pub const CSV_HEADER: [&str; 8] =
    ["method", "m", "run", "model_error", "wall_time_ms", "inner_iters_mean", "rho_selected", "alpha_selected"];

/// Writes records as CSV. With `omit_timings` every wall time is written as
/// 0 so repeated runs give identical bytes.
pub fn write_csv<W: Write>(records: &[ResultRecord], out: W, omit_timings: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let time = if omit_timings { 0.0 } else { r.wall_time_ms };
        w.write_record([
            r.method.name().to_string(),
            r.m.to_string(),
            r.run.to_string(),
            r.model_error.to_string(),
            time.to_string(),
            r.inner_iters_mean.to_string(),
            r.rho_selected.to_string(),
            r.alpha_selected.map(|a| a.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::InvalidStructure(format!("unexpected CSV header {header:?}")));
    }
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Mean and standard error of the model error for one `(method, m)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: Method,
    pub m: usize,
    pub runs: usize,
    pub mean_error: f64,
    pub stderr: f64,
    pub nonconverged: usize,
}

pub fn summarize(records: &[ResultRecord]) -> Vec<SummaryRow> {
    let mut groups: std::collections::BTreeMap<(Method, usize), Vec<&ResultRecord>> = Default::default();
    for r in records {
        groups.entry((r.method, r.m)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((method, m), rows)| {
            let errors = Array1::from_iter(rows.iter().map(|r| r.model_error));
            let k = errors.len() as f64;
            let mean = errors.sum() / k;
            let stderr = if rows.len() > 1 { (errors.var(1.0) / k).sqrt() } else { 0.0 };
            SummaryRow { method, m, runs: rows.len(), mean_error: mean, stderr, nonconverged: rows.iter().filter(|r| !r.converged).count() }
        })
        .collect()
}

/// Mean model error of `method` over all records with sample size `m`.
pub fn mean_error(records: &[ResultRecord], method: Method, m: usize) -> Option<f64> {
    summarize(records).into_iter().find(|s| s.method == method && s.m == m).map(|s| s.mean_error)
}
