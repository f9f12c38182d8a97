//! Orthonormal 2D Haar transform and the coefficient quadtree.
//!
//! Coefficients use the Mallat layout: after a full decomposition of an
//! `N × N` image the coarsest average sits at `(0, 0)` and the details of
//! scale `2^j` fill the three blocks bordering the `2^j × 2^j` corner.

use std::f64::consts::FRAC_1_SQRT_2;

use ndarray::{s, Array1, Array2, ArrayViewMut1};
use rand::Rng;

use crate::error::{Error, Result};
use crate::sets::{tree_edge_map, EdgeMap};

fn check_side(side: usize) -> Result<()> {
    if side == 0 || !side.is_power_of_two() {
        return Err(Error::InvalidDimension(format!("image side must be a power of two, got {side}")));
    }
    Ok(())
}

fn forward_1d(mut v: ArrayViewMut1<'_, f64>, buf: &mut [f64]) {
    let half = v.len() / 2;
    for i in 0..half {
        let (a, b) = (v[2 * i], v[2 * i + 1]);
        buf[i] = (a + b) * FRAC_1_SQRT_2;
        buf[half + i] = (a - b) * FRAC_1_SQRT_2;
    }
    for (x, &b) in v.iter_mut().zip(buf.iter()) {
        *x = b;
    }
}

fn inverse_1d(mut v: ArrayViewMut1<'_, f64>, buf: &mut [f64]) {
    let half = v.len() / 2;
    for i in 0..half {
        let (a, d) = (v[i], v[half + i]);
        buf[2 * i] = (a + d) * FRAC_1_SQRT_2;
        buf[2 * i + 1] = (a - d) * FRAC_1_SQRT_2;
    }
    for (x, &b) in v.iter_mut().zip(buf.iter()) {
        *x = b;
    }
}

/// Full 2D Haar decomposition of a square power-of-two image.
pub fn haar_forward(image: &Array2<f64>) -> Result<Array2<f64>> {
    let side = image.nrows();
    check_side(side)?;
    if image.ncols() != side {
        return Err(Error::InvalidDimension(format!("image must be square, got {}x{}", side, image.ncols())));
    }
    let mut out = image.clone();
    let mut buf = vec![0.0; side];
    let mut size = side;
    while size > 1 {
        let mut block = out.slice_mut(s![..size, ..size]);
        for row in block.rows_mut() {
            forward_1d(row, &mut buf[..size]);
        }
        for col in block.columns_mut() {
            forward_1d(col, &mut buf[..size]);
        }
        size /= 2;
    }
    Ok(out)
}

/// Inverse of [`haar_forward`].
pub fn haar_inverse(coeffs: &Array2<f64>) -> Result<Array2<f64>> {
    let side = coeffs.nrows();
    check_side(side)?;
    if coeffs.ncols() != side {
        return Err(Error::InvalidDimension(format!("coefficients must be square, got {}x{}", side, coeffs.ncols())));
    }
    let mut out = coeffs.clone();
    let mut buf = vec![0.0; side];
    let mut size = 2;
    while size <= side {
        let mut block = out.slice_mut(s![..size, ..size]);
        for col in block.columns_mut() {
            inverse_1d(col, &mut buf[..size]);
        }
        for row in block.rows_mut() {
            inverse_1d(row, &mut buf[..size]);
        }
        size *= 2;
    }
    Ok(out)
}

/// Parent of every coefficient in the row-major flattening. Detail `(r, c)`
/// hangs off `(r/2, c/2)`; the three coarsest details hang off the root.
pub fn quadtree_parents(side: usize) -> Result<Vec<Option<usize>>> {
    check_side(side)?;
    let mut parents = vec![None; side * side];
    for r in 0..side {
        for c in 0..side {
            if r == 0 && c == 0 {
                continue;
            }
            parents[r * side + c] = Some(if r < 2 && c < 2 { 0 } else { (r / 2) * side + c / 2 });
        }
    }
    Ok(parents)
}

/// Random piecewise-constant image: a background level plus a few
/// axis-aligned rectangles snapped to a coarse lattice.
pub fn piecewise_constant_image(side: usize, rng: &mut impl Rng) -> Result<Array2<f64>> {
    check_side(side)?;
    let snap = (side / 8).max(1);
    let cells = side / snap;
    let mut image = Array2::from_elem((side, side), rng.random_range(0.5..1.5));
    for _ in 0..3 {
        let (r0, c0) = (rng.random_range(0..cells), rng.random_range(0..cells));
        let (h, w) = (rng.random_range(1..=cells - r0), rng.random_range(1..=cells - c0));
        let level = rng.random_range(-2.0..2.0);
        image.slice_mut(s![r0 * snap..(r0 + h) * snap, c0 * snap..(c0 + w) * snap]).mapv_inplace(|v| v + level);
    }
    Ok(image)
}

/// Keeps `k` coefficients forming a rooted subtree, grown greedily from the
/// root by always adding the largest-magnitude child of the current support.
pub fn tree_truncate(coeffs: &Array1<f64>, parents: &[Option<usize>], k: usize) -> Array1<f64> {
    let n = coeffs.len();
    let mut children = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for (i, p) in parents.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(i),
            None => roots.push(i),
        }
    }
    let mut frontier = roots;
    let mut out = Array1::zeros(n);
    for _ in 0..k.min(n) {
        let Some((pos, _)) =
            frontier.iter().enumerate().max_by(|a, b| coeffs[*a.1].abs().total_cmp(&coeffs[*b.1].abs()).then(b.1.cmp(a.1)))
        else {
            break;
        };
        let node = frontier.swap_remove(pos);
        out[node] = coeffs[node];
        frontier.extend_from_slice(&children[node]);
    }
    out
}

/// Tree-sparse wavelet model: a random piecewise-constant image transformed,
/// truncated to a `k`-node subtree, and the quadtree edge map.
pub fn haar_tree_setup(side: usize, k: usize, rng: &mut impl Rng) -> Result<(Array1<f64>, EdgeMap)> {
    let parents = quadtree_parents(side)?;
    let image = piecewise_constant_image(side, rng)?;
    let coeffs = haar_forward(&image)?;
    let flat = Array1::from_iter(coeffs.iter().copied());
    let beta = tree_truncate(&flat, &parents, k);
    Ok((beta, tree_edge_map(&parents)?))
}
