//! Constraint sets of the form `{λ ≥ 0 : Aλ ∈ S}`.
//!
//! `A` is always a signed incidence operator ([`EdgeMap`]): every row holds a
//! `+1` and a `-1`, so it maps a node vector to per-edge differences. `S` is a
//! [`SimpleSet`] with a cheap exact Euclidean projection.

use std::sync::OnceLock;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Sparse signed incidence matrix. Row `e` of the matrix is `e_head - e_tail`
/// for the stored pair `edges[e] = [head, tail]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    cols: usize,
    edges: Vec<[usize; 2]>,
}

impl EdgeMap {
    pub fn new(cols: usize, edges: Vec<[usize; 2]>) -> Result<Self> {
        for (e, &[head, tail]) in edges.iter().enumerate() {
            if head >= cols || tail >= cols {
                return Err(Error::InvalidStructure(format!("edge {e} = ({head}, {tail}) references a node outside 0..{cols}")));
            }
            if head == tail {
                return Err(Error::InvalidStructure(format!("edge {e} is a self loop on node {head}")));
            }
        }
        Ok(Self { cols, edges })
    }

    /// The map with no rows (no structural constraint).
    pub fn empty(cols: usize) -> Self {
        Self { cols, edges: Vec::new() }
    }

    pub fn rows(&self) -> usize {
        self.edges.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// `out = A x`.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.edges.len());
        for (o, &[head, tail]) in out.iter_mut().zip(&self.edges) {
            *o = x[head] - x[tail];
        }
    }

    /// `out += scale * Aᵀ t`.
    pub fn add_transpose_into(&self, t: &[f64], scale: f64, out: &mut [f64]) {
        debug_assert_eq!(t.len(), self.edges.len());
        debug_assert_eq!(out.len(), self.cols);
        for (&te, &[head, tail]) in t.iter().zip(&self.edges) {
            let v = scale * te;
            out[head] += v;
            out[tail] -= v;
        }
    }

    pub fn apply(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_dim(self.cols, x.len())?;
        let x = x.to_vec();
        let mut out = vec![0.0; self.rows()];
        self.apply_into(&x, &mut out);
        Ok(Array1::from(out))
    }

    pub fn apply_transpose(&self, t: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_dim(self.rows(), t.len())?;
        let t = t.to_vec();
        let mut out = vec![0.0; self.cols];
        self.add_transpose_into(&t, 1.0, &mut out);
        Ok(Array1::from(out))
    }

    /// Dense copy, for tests and small diagnostics only.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.rows(), self.cols));
        for (e, &[head, tail]) in self.edges.iter().enumerate() {
            a[[e, head]] = 1.0;
            a[[e, tail]] = -1.0;
        }
        a
    }
}

/// Edge map of the path graph on `n` nodes; row `i` is `e_i - e_{i+1}`.
pub fn grid_edge_map_1d(n: usize) -> Result<EdgeMap> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("1D grid needs n >= 2, got {n}")));
    }
    EdgeMap::new(n, (0..n - 1).map(|i| [i, i + 1]).collect())
}

/// Edge map of a `rows x cols` grid flattened row-major. Horizontal edges come
/// first, then vertical ones; each row is `e_lower - e_higher`.
pub fn grid_edge_map_2d(rows: usize, cols: usize) -> Result<EdgeMap> {
    if rows == 0 || cols == 0 || rows * cols < 2 {
        return Err(Error::InvalidDimension(format!("2D grid {rows}x{cols} has no edges")));
    }
    let mut edges = Vec::with_capacity(rows * (cols - 1) + (rows - 1) * cols);
    for r in 0..rows {
        for c in 0..cols - 1 {
            let i = r * cols + c;
            edges.push([i, i + 1]);
        }
    }
    for r in 0..rows - 1 {
        for c in 0..cols {
            let i = r * cols + c;
            edges.push([i, i + cols]);
        }
    }
    EdgeMap::new(rows * cols, edges)
}

/// Edge map of a rooted forest. `parents[i] == None` marks a root. Each
/// non-root node contributes the row `e_parent - e_child`, so `Aλ ≥ 0` reads
/// `λ_parent ≥ λ_child`.
pub fn tree_edge_map(parents: &[Option<usize>]) -> Result<EdgeMap> {
    let n = parents.len();
    if n == 0 {
        return Err(Error::InvalidDimension("tree needs at least one node".into()));
    }
    for (i, p) in parents.iter().enumerate() {
        if let Some(p) = *p {
            if p >= n {
                return Err(Error::InvalidStructure(format!("node {i} has parent {p} outside 0..{n}")));
            }
            if p == i {
                return Err(Error::InvalidStructure(format!("node {i} is its own parent")));
            }
        }
    }
    // 0 = unvisited, 1 = on the current walk, 2 = reaches a root
    let mut state = vec![0u8; n];
    let mut walk = Vec::new();
    for start in 0..n {
        let mut node = start;
        walk.clear();
        loop {
            match state[node] {
                2 => break,
                1 => return Err(Error::InvalidStructure(format!("cycle through node {node}"))),
                _ => {}
            }
            state[node] = 1;
            walk.push(node);
            match parents[node] {
                Some(p) => node = p,
                None => break,
            }
        }
        for &w in &walk {
            state[w] = 2;
        }
    }
    let edges = parents.iter().enumerate().filter_map(|(child, p)| p.map(|p| [p, child])).collect();
    EdgeMap::new(n, edges)
}

/// The simple convex set `S` that `Aλ` is constrained to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SimpleSet {
    #[serde(rename = "orthant")]
    NonnegativeOrthant,
    #[serde(rename = "l1ball")]
    L1Ball {
        #[serde(rename = "alpha")]
        radius: f64,
    },
}

impl SimpleSet {
    /// Euclidean projection, in place.
    pub fn project_in_place(&self, t: &mut [f64]) {
        match *self {
            SimpleSet::NonnegativeOrthant => {
                for x in t.iter_mut() {
                    *x = x.max(0.0);
                }
            }
            SimpleSet::L1Ball { radius } => project_l1_ball(t, radius),
        }
    }

    pub fn project(&self, t: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut out = t.to_owned();
        match out.as_slice_mut() {
            Some(s) => self.project_in_place(s),
            None => unreachable!("owned 1-D arrays are contiguous"),
        }
        out
    }

    /// Euclidean distance from `t` to the set.
    pub fn distance(&self, t: &[f64]) -> f64 {
        let mut p = t.to_vec();
        self.project_in_place(&mut p);
        p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

/// Projection onto `{x : ‖x‖₁ ≤ radius}` by Michelot's active-set
/// iteration: the threshold `(Σ_active |xᵢ| − radius)/|active|` only grows,
/// and entries below it leave the active set until none do.
fn project_l1_ball(t: &mut [f64], radius: f64) {
    let l1: f64 = t.iter().map(|x| x.abs()).sum();
    if l1 <= radius {
        return;
    }
    let mut active: Vec<f64> = t.iter().map(|x| x.abs()).filter(|&u| u > 0.0).collect();
    let mut theta = (active.iter().sum::<f64>() - radius) / active.len() as f64;
    loop {
        let before = active.len();
        active.retain(|&u| u > theta);
        if active.len() == before {
            break;
        }
        theta = (active.iter().sum::<f64>() - radius) / active.len() as f64;
    }
    for x in t.iter_mut() {
        let shrunk = (x.abs() - theta).max(0.0);
        *x = shrunk.copysign(*x);
    }
}

/// Free-function form of [`SimpleSet::project`].
pub fn project_simple(set: &SimpleSet, t: ArrayView1<'_, f64>) -> Array1<f64> {
    set.project(t)
}

/// `Λ = {λ ∈ ℝⁿ₊ : Aλ ∈ S}`.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    edge_map: EdgeMap,
    simple_set: SimpleSet,
    composite_norm_sq: OnceLock<f64>,
}

impl ConstraintSet {
    pub fn new(edge_map: EdgeMap, simple_set: SimpleSet) -> Result<Self> {
        if let SimpleSet::L1Ball { radius } = simple_set {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidParameter(format!("l1 ball radius must be positive, got {radius}")));
            }
        }
        Ok(Self { edge_map, simple_set, composite_norm_sq: OnceLock::new() })
    }

    /// The whole nonnegative orthant (no structure, `k = 0`).
    pub fn unconstrained(n: usize) -> Self {
        Self { edge_map: EdgeMap::empty(n), simple_set: SimpleSet::NonnegativeOrthant, composite_norm_sq: OnceLock::new() }
    }

    pub fn grid_1d(n: usize, set: SimpleSet) -> Result<Self> {
        Self::new(grid_edge_map_1d(n)?, set)
    }

    pub fn grid_2d(rows: usize, cols: usize, set: SimpleSet) -> Result<Self> {
        Self::new(grid_edge_map_2d(rows, cols)?, set)
    }

    pub fn tree(parents: &[Option<usize>], set: SimpleSet) -> Result<Self> {
        Self::new(tree_edge_map(parents)?, set)
    }

    pub fn dim(&self) -> usize {
        self.edge_map.cols()
    }

    pub fn edge_map(&self) -> &EdgeMap {
        &self.edge_map
    }

    pub fn simple_set(&self) -> &SimpleSet {
        &self.simple_set
    }

    /// `λ_i ≥ -tol` for all `i` and `dist(Aλ, S) ≤ tol`.
    pub fn is_feasible(&self, lambda: ArrayView1<'_, f64>, tol: f64) -> Result<bool> {
        check_dim(self.dim(), lambda.len())?;
        if lambda.iter().any(|&l| l < -tol || l.is_nan()) {
            return Ok(false);
        }
        let x = lambda.to_vec();
        let mut t = vec![0.0; self.edge_map.rows()];
        self.edge_map.apply_into(&x, &mut t);
        Ok(self.simple_set.distance(&t) <= tol)
    }

    /// Upper estimate of `‖B‖² = ‖I + AᵀA‖` with `Bᵀ = [I, Aᵀ]`: power
    /// iteration (at most 50 steps, relative change 1e-9) inflated by 1%.
    /// Computed once and cached.
    pub fn composite_norm_sq(&self) -> f64 {
        *self.composite_norm_sq.get_or_init(|| composite_norm_sq_estimate(&self.edge_map))
    }
}

fn composite_norm_sq_estimate(a: &EdgeMap) -> f64 {
    const MAX_ITER: usize = 50;
    const REL_TOL: f64 = 1e-9;
    const INFLATE: f64 = 1.01;
    let n = a.cols();
    if a.rows() == 0 || n == 0 {
        return INFLATE;
    }
    // any start vector with a component outside the constants (the kernel of A)
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919 + 13) % 101) as f64 / 101.0).collect();
    let mut ax = vec![0.0; a.rows()];
    let mut y = vec![0.0; n];
    let mut est = 0.0_f64;
    for _ in 0..MAX_ITER {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= norm);
        a.apply_into(&x, &mut ax);
        y.copy_from_slice(&x);
        a.add_transpose_into(&ax, 1.0, &mut y);
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let done = (rayleigh - est).abs() <= REL_TOL * rayleigh.abs();
        est = rayleigh;
        std::mem::swap(&mut x, &mut y);
        if done {
            break;
        }
    }
    // the power iterate runs on I + AᵀA directly
    est * INFLATE
}

/// JSON description of a constraint set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ConstraintDescription {
    #[serde(rename = "grid1d")]
    Grid1d { n: usize, set: SimpleSet },
    #[serde(rename = "grid2d")]
    Grid2d { rows: usize, cols: usize, set: SimpleSet },
    /// Parent index per node; a negative entry or a self reference marks a root.
    #[serde(rename = "tree")]
    Tree { parents: Vec<i64>, set: SimpleSet },
    /// No structural rows: `Λ` is the whole orthant.
    #[serde(rename = "none")]
    Unconstrained { n: usize },
}

impl ConstraintDescription {
    pub fn build(&self) -> Result<ConstraintSet> {
        match self {
            Self::Grid1d { n, set } => ConstraintSet::grid_1d(*n, *set),
            Self::Grid2d { rows, cols, set } => ConstraintSet::grid_2d(*rows, *cols, *set),
            Self::Tree { parents, set } => {
                let parents: Vec<Option<usize>> =
                    parents.iter().enumerate().map(|(i, &p)| if p < 0 || p as usize == i { None } else { Some(p as usize) }).collect();
                ConstraintSet::tree(&parents, *set)
            }
            Self::Unconstrained { n } => {
                if *n == 0 {
                    return Err(Error::InvalidDimension("n must be positive".into()));
                }
                Ok(ConstraintSet::unconstrained(*n))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConstraintFile {
    #[serde(default = "crate::schema_version")]
    schema_version: u32,
    #[serde(flatten)]
    description: ConstraintDescription,
}

impl ConstraintDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConstraintFile = serde_json::from_str(text)?;
        if file.schema_version != crate::SCHEMA_VERSION {
            return Err(Error::SchemaVersion(file.schema_version));
        }
        Ok(file.description)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ConstraintFile { schema_version: crate::SCHEMA_VERSION, description: self.clone() };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    #[test]
    fn grid_1d_examples() {
        let a = grid_edge_map_1d(2).unwrap();
        assert_eq!(a.to_dense(), array![[1.0, -1.0]]);

        let a = grid_edge_map_1d(4).unwrap();
        assert_eq!(a.apply(array![1.0, 1.0, 1.0, 1.0].view()).unwrap(), array![0.0, 0.0, 0.0]);

        let a = grid_edge_map_1d(3).unwrap();
        assert_eq!(a.apply(array![3.0, 1.0, 2.0].view()).unwrap(), array![2.0, -1.0]);

        assert!(matches!(grid_edge_map_1d(1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn grid_2d_edge_counts() {
        assert_eq!(grid_edge_map_2d(2, 2).unwrap().rows(), 4);
        assert_eq!(grid_edge_map_2d(20, 20).unwrap().rows(), 760);
        assert_eq!(grid_edge_map_2d(1, 4).unwrap(), grid_edge_map_1d(4).unwrap());
        assert_eq!(grid_edge_map_2d(4, 1).unwrap(), grid_edge_map_1d(4).unwrap());
        assert!(grid_edge_map_2d(1, 1).is_err());
        assert!(grid_edge_map_2d(0, 5).is_err());
    }

    #[test]
    fn tree_maps() {
        // chain 0 -> 1 -> 2 -> 3
        let parents = [None, Some(0), Some(1), Some(2)];
        let set = ConstraintSet::tree(&parents, SimpleSet::NonnegativeOrthant).unwrap();
        assert!(set.is_feasible(array![4.0, 3.0, 3.0, 0.0].view(), 0.0).unwrap());
        assert!(!set.is_feasible(array![4.0, 3.0, 3.5, 0.0].view(), 0.0).unwrap());

        assert_eq!(tree_edge_map(&[None]).unwrap().rows(), 0);

        let binary: Vec<Option<usize>> = (0..7).map(|i| if i == 0 { None } else { Some((i - 1) / 2) }).collect();
        assert_eq!(tree_edge_map(&binary).unwrap().rows(), 6);

        let cyclic = [None, Some(2), Some(3), Some(1)];
        assert!(matches!(tree_edge_map(&cyclic), Err(Error::InvalidStructure(_))));
        assert!(tree_edge_map(&[Some(0)]).is_err());
    }

    #[test]
    fn projection_examples() {
        let orthant = SimpleSet::NonnegativeOrthant;
        assert_eq!(orthant.project(array![-1.0, 2.0].view()), array![0.0, 2.0]);
        let ball = SimpleSet::L1Ball { radius: 1.0 };
        assert_eq!(ball.project(array![0.3, -0.2].view()), array![0.3, -0.2]);
        let p = ball.project(array![2.0, 0.0].view());
        assert!(dist(p.as_slice().unwrap(), &[1.0, 0.0]) < 1e-12);
    }

    /// Brute force: minimize ‖z − t‖ over a dense grid of the 2-D ball.
    #[test]
    fn l1_projection_matches_grid_search_in_2d() {
        let ball = SimpleSet::L1Ball { radius: 1.0 };
        let t = [2.0, 0.0];
        let steps = 2000;
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in 0..=steps {
            for j in 0..=steps {
                let z = [-1.0 + 2.0 * i as f64 / steps as f64, -1.0 + 2.0 * j as f64 / steps as f64];
                if z[0].abs() + z[1].abs() <= 1.0 + 1e-12 {
                    let d = dist(&z, &t);
                    if d < best.0 {
                        best = (d, z);
                    }
                }
            }
        }
        let p = ball.project(array![2.0, 0.0].view());
        assert!(dist(p.as_slice().unwrap(), &best.1) <= 2e-3);
        assert!((dist(p.as_slice().unwrap(), &t) - best.0).abs() < 1e-9);
    }

    /// Active-set enumeration: for every sign pattern and support, the
    /// projection onto the face `Σ s_i z_i = r` restricted to the support; keep
    /// the closest feasible candidate.
    fn l1_projection_by_enumeration(t: &[f64], radius: f64) -> Vec<f64> {
        if t.iter().map(|x| x.abs()).sum::<f64>() <= radius {
            return t.to_vec();
        }
        let k = t.len();
        let mut best = (f64::INFINITY, vec![0.0; k]);
        for support in 1u32..(1 << k) {
            let idx: Vec<usize> = (0..k).filter(|i| support & (1 << i) != 0).collect();
            for signs in 0u32..(1 << idx.len()) {
                let s: Vec<f64> = (0..idx.len()).map(|j| if signs & (1 << j) != 0 { -1.0 } else { 1.0 }).collect();
                // minimize ‖z_S − t_S‖² s.t. sᵀz_S = r  ⇒  z_S = t_S − ν s
                let dot: f64 = idx.iter().zip(&s).map(|(&i, si)| si * t[i]).sum();
                let nu = (dot - radius) / idx.len() as f64;
                let mut z = vec![0.0; k];
                let mut ok = true;
                for (&i, si) in idx.iter().zip(&s) {
                    z[i] = t[i] - nu * si;
                    if z[i] * si < 0.0 {
                        ok = false;
                    }
                }
                if ok && z.iter().map(|x| x.abs()).sum::<f64>() <= radius + 1e-12 {
                    let d = dist(&z, t);
                    if d < best.0 {
                        best = (d, z);
                    }
                }
            }
        }
        best.1
    }

    fn vec_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, 1..=max_len)
    }

    proptest! {
        #[test]
        fn l1_projection_matches_enumeration(t in vec_strategy(5), radius in 0.1f64..4.0) {
            let ball = SimpleSet::L1Ball { radius };
            let p = ball.project(Array1::from(t.clone()).view());
            let oracle = l1_projection_by_enumeration(&t, radius);
            prop_assert!(dist(p.as_slice().unwrap(), &oracle) < 1e-8);
        }

        #[test]
        fn projection_idempotent_and_minimal(
            t in vec_strategy(12),
            radius in 0.1f64..4.0,
            seed in prop::collection::vec(-1.0f64..1.0, 12),
            orthant in any::<bool>(),
        ) {
            let set = if orthant { SimpleSet::NonnegativeOrthant } else { SimpleSet::L1Ball { radius } };
            let p = set.project(Array1::from(t.clone()).view());
            let pp = set.project(p.view());
            prop_assert!(dist(p.as_slice().unwrap(), pp.as_slice().unwrap()) <= 1e-12);
            // random member of S
            let mut s: Vec<f64> = seed[..t.len()].iter().map(|x| x * 3.0).collect();
            set.project_in_place(&mut s);
            prop_assert!(dist(p.as_slice().unwrap(), &t) <= dist(&s, &t) + 1e-12);
        }

        #[test]
        fn projection_nonexpansive(
            pair in (1usize..10).prop_flat_map(|k| (prop::collection::vec(-5.0f64..5.0, k), prop::collection::vec(-5.0f64..5.0, k))),
            radius in 0.1f64..4.0,
        ) {
            let (a, b) = pair;
            for set in [SimpleSet::NonnegativeOrthant, SimpleSet::L1Ball { radius }] {
                let pa = set.project(Array1::from(a.clone()).view());
                let pb = set.project(Array1::from(b.clone()).view());
                prop_assert!(dist(pa.as_slice().unwrap(), pb.as_slice().unwrap()) <= dist(&a, &b) + 1e-12);
            }
        }

        #[test]
        fn edge_maps_annihilate_constants(rows in 1usize..6, cols in 2usize..6, c in -3.0f64..3.0) {
            let a = grid_edge_map_2d(rows, cols).unwrap();
            let x = vec![c; rows * cols];
            let mut out = vec![1.0; a.rows()];
            a.apply_into(&x, &mut out);
            prop_assert!(out.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn transpose_matches_dense() {
        let a = grid_edge_map_2d(3, 4).unwrap();
        let t: Array1<f64> = (0..a.rows()).map(|i| (i as f64 * 0.37).sin()).collect();
        let dense = a.to_dense();
        let expected = dense.t().dot(&t);
        let got = a.apply_transpose(t.view()).unwrap();
        assert!(dist(got.as_slice().unwrap(), expected.as_slice().unwrap()) < 1e-12);
    }

    #[test]
    fn feasibility() {
        let grid = ConstraintSet::grid_1d(6, SimpleSet::L1Ball { radius: 1.0 }).unwrap();
        let tree = ConstraintSet::tree(&[None, Some(0), Some(0), Some(1)], SimpleSet::NonnegativeOrthant).unwrap();
        assert!(grid.is_feasible(Array1::ones(6).view(), 0.0).unwrap());
        assert!(tree.is_feasible(Array1::ones(4).view(), 0.0).unwrap());
        assert!(!grid.is_feasible(array![1.0, -1.0, 1.0, 1.0, 1.0, 1.0].view(), 0.0).unwrap());
        // ‖Aλ‖₁ = 2 > 1
        assert!(!grid.is_feasible(array![0.0, 1.0, 0.0, 0.0, 0.0, 0.0].view(), 0.0).unwrap());
        assert!(grid.is_feasible(array![0.0, 1.0, 0.0, 0.0, 0.0, 0.0].view(), 1.0).unwrap());
        assert!(matches!(grid.is_feasible(Array1::ones(5).view(), 0.0), Err(Error::DimensionMismatch { expected: 6, got: 5 })));
    }

    #[test]
    fn composite_norm_bounds_rayleigh_quotients() {
        let set = ConstraintSet::grid_2d(6, 7, SimpleSet::L1Ball { radius: 1.0 }).unwrap();
        let est = set.composite_norm_sq();
        // exact value for the 2D grid Laplacian is < 1 + 8
        assert!(est <= 9.0 + 1e-9);
        let a = set.edge_map();
        for s in 0..50 {
            let v: Vec<f64> = (0..a.cols()).map(|i| ((i * 31 + s * 17) as f64 * 0.913).sin()).collect();
            let mut av = vec![0.0; a.rows()];
            a.apply_into(&v, &mut av);
            let num: f64 = v.iter().map(|x| x * x).sum::<f64>() + av.iter().map(|x| x * x).sum::<f64>();
            let den: f64 = v.iter().map(|x| x * x).sum();
            assert!(est + 1e-6 >= num / den);
        }
        // the alternating vector is the top eigenvector of a path Laplacian
        let path = ConstraintSet::grid_1d(5, SimpleSet::NonnegativeOrthant).unwrap();
        let v = [1.0, -1.0, 1.0, -1.0, 1.0];
        let mut av = vec![0.0; 4];
        path.edge_map().apply_into(&v, &mut av);
        let q = (5.0 + av.iter().map(|x| x * x).sum::<f64>()) / 5.0;
        assert!(path.composite_norm_sq() + 1e-6 >= q);
        assert_eq!(ConstraintSet::unconstrained(3).composite_norm_sq(), 1.01);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"kind": "grid2d", "rows": 3, "cols": 4, "set": {"kind": "l1ball", "alpha": 2.0}}"#;
        let d = ConstraintDescription::from_json(text).unwrap();
        assert_eq!(d, ConstraintDescription::Grid2d { rows: 3, cols: 4, set: SimpleSet::L1Ball { radius: 2.0 } });
        let again = ConstraintDescription::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(d, again);

        let tree = r#"{"kind": "tree", "parents": [-1, 0, 0, 1], "set": {"kind": "orthant"}}"#;
        let set = ConstraintDescription::from_json(tree).unwrap().build().unwrap();
        assert_eq!(set.edge_map().rows(), 3);

        let bad = r#"{"schema_version": 2, "kind": "grid1d", "n": 4, "set": {"kind": "orthant"}}"#;
        assert!(matches!(ConstraintDescription::from_json(bad), Err(Error::SchemaVersion(2))));
        let bad_radius = r#"{"kind": "grid1d", "n": 4, "set": {"kind": "l1ball", "alpha": 0.0}}"#;
        assert!(ConstraintDescription::from_json(bad_radius).unwrap().build().is_err());
    }
}
