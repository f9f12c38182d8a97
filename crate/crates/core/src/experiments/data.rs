//! Synthetic models, designs and responses.
//!
//! Every random draw goes through a [`ChaCha8Rng`], so a seed fixes the data
//! bit for bit on every platform.

use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one experiment cell, derived from the spec seed and the
/// cell coordinates. Different coordinates give unrelated streams.
pub fn cell_rng(seed: u64, coords: &[u64]) -> ChaCha8Rng {
    let mut state = splitmix64(seed);
    for &c in coords {
        state = splitmix64(state ^ splitmix64(c.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    ChaCha8Rng::seed_from_u64(state)
}

fn random_sign(rng: &mut impl Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Splits `sparsity` into `regions` lengths differing by at most one.
pub fn region_lengths(sparsity: usize, regions: usize) -> Vec<usize> {
    let base = sparsity / regions;
    let extra = sparsity % regions;
    (0..regions).map(|i| base + usize::from(i < extra)).collect()
}

/// `regions` contiguous runs of `±1` in a length-`n` vector, separated by at
/// least one zero. Gap sizes are a uniformly random composition of the spare
/// zeros and the run order is shuffled.
pub fn make_region_model_1d(n: usize, regions: usize, sparsity: usize, rng: &mut impl Rng) -> Result<Array1<f64>> {
    if regions == 0 || sparsity < regions {
        return Err(Error::Placement(format!("{regions} regions need at least that many nonzeros, got {sparsity}")));
    }
    if sparsity > n || n - sparsity < regions - 1 {
        return Err(Error::Placement(format!("{regions} separated regions of total length {sparsity} do not fit in {n}")));
    }
    let mut lengths = region_lengths(sparsity, regions);
    for i in (1..lengths.len()).rev() {
        let j = rng.random_range(0..=i);
        lengths.swap(i, j);
    }
    // spare zeros beyond the mandatory single gaps, spread over regions + 1 slots
    let spare = n - sparsity - (regions - 1);
    let mut cuts: Vec<usize> = sample(rng, spare + regions, regions).into_vec();
    cuts.sort_unstable();
    let mut gaps = Vec::with_capacity(regions + 1);
    let mut prev = 0;
    for (i, &c) in cuts.iter().enumerate() {
        gaps.push(c - prev - usize::from(i > 0));
        prev = c;
    }
    gaps.push(spare + regions - 1 - prev);

    let mut beta = Array1::zeros(n);
    let mut pos = 0;
    for (r, &len) in lengths.iter().enumerate() {
        pos += gaps[r] + usize::from(r > 0);
        for i in pos..pos + len {
            beta[i] = random_sign(rng);
        }
        pos += len;
    }
    Ok(beta)
}

/// Rectangle layouts for the 2D region model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionShape2d {
    #[serde(rename = "one_5x5")]
    One5x5,
    #[serde(rename = "two_4x4_3x3")]
    Two4x4And3x3,
    #[serde(rename = "three_3x3")]
    Three3x3,
    #[serde(rename = "four_3x2")]
    Four3x2,
}

impl RegionShape2d {
    pub fn rectangles(self) -> &'static [(usize, usize)] {
        match self {
            RegionShape2d::One5x5 => &[(5, 5)],
            RegionShape2d::Two4x4And3x3 => &[(4, 4), (3, 3)],
            RegionShape2d::Three3x3 => &[(3, 3), (3, 3), (3, 3)],
            RegionShape2d::Four3x2 => &[(3, 2), (3, 2), (3, 2), (3, 2)],
        }
    }

    pub fn sparsity(self) -> usize {
        self.rectangles().iter().map(|(h, w)| h * w).sum()
    }
}

const PLACEMENT_ATTEMPTS: usize = 10_000;

/// Non-overlapping rectangles of `±1` on a `rows × cols` grid, flattened
/// row-major. Rectangles are placed uniformly at random and a layout is
/// rejected if two of them overlap or touch.
pub fn make_region_model_2d(rows: usize, cols: usize, shape: RegionShape2d, rng: &mut impl Rng) -> Result<Array1<f64>> {
    make_rectangles_2d(rows, cols, shape.rectangles(), rng)
}

/// [`make_region_model_2d`] with an explicit list of `(height, width)` rectangles.
pub fn make_rectangles_2d(rows: usize, cols: usize, rects: &[(usize, usize)], rng: &mut impl Rng) -> Result<Array1<f64>> {
    if rects.iter().any(|&(h, w)| h == 0 || w == 0 || h > rows || w > cols) {
        return Err(Error::Placement(format!("{rects:?} does not fit in {rows}x{cols}")));
    }
    'attempt: for _ in 0..PLACEMENT_ATTEMPTS {
        let mut placed: Vec<(usize, usize, usize, usize)> = Vec::with_capacity(rects.len());
        for &(h, w) in rects {
            let r = rng.random_range(0..=rows - h);
            let c = rng.random_range(0..=cols - w);
            // a one-cell margin keeps regions apart
            let clash = placed.iter().any(|&(pr, pc, ph, pw)| r <= pr + ph && pr <= r + h && c <= pc + pw && pc <= c + w);
            if clash {
                continue 'attempt;
            }
            placed.push((r, c, h, w));
        }
        let mut beta = Array1::zeros(rows * cols);
        for &(r, c, h, w) in &placed {
            for i in r..r + h {
                for j in c..c + w {
                    beta[i * cols + j] = random_sign(rng);
                }
            }
        }
        return Ok(beta);
    }
    Err(Error::Placement(format!("no separated layout for {rects:?} on {rows}x{cols} after {PLACEMENT_ATTEMPTS} attempts")))
}

/// `m × n` matrix with i.i.d. standard normal entries.
pub fn gaussian_design(m: usize, n: usize, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((m, n), || StandardNormal.sample(rng))
}

/// `y = Xβ* + σξ` with `ξ` standard normal. No noise is drawn when `σ = 0`.
pub fn generate_output(x: &Array2<f64>, beta_star: &Array1<f64>, noise_std: f64, rng: &mut impl Rng) -> Array1<f64> {
    let clean = x.dot(beta_star);
    if noise_std == 0.0 {
        return clean;
    }
    clean.mapv(|v| {
        let xi: f64 = StandardNormal.sample(rng);
        v + noise_std * xi
    })
}

/// Noise level giving the requested signal-to-noise ratio on `Xβ*`.
pub fn noise_std_for_snr(signal: &Array1<f64>, snr_db: f64) -> f64 {
    let rms = (signal.dot(signal) / signal.len().max(1) as f64).sqrt();
    rms * 10f64.powf(-snr_db / 20.0)
}

/// `‖β̂ − β*‖₂ / ‖β*‖₂`.
pub fn model_error(estimate: &Array1<f64>, truth: &Array1<f64>) -> f64 {
    let diff = estimate - truth;
    diff.dot(&diff).sqrt() / truth.dot(truth).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn runs(beta: &Array1<f64>) -> Vec<usize> {
        let mut out = Vec::new();
        let mut len = 0;
        for &b in beta.iter() {
            if b != 0.0 {
                len += 1;
            } else if len > 0 {
                out.push(len);
                len = 0;
            }
        }
        if len > 0 {
            out.push(len);
        }
        out
    }

    #[test]
    fn lengths_sum_to_sparsity() {
        assert_eq!(region_lengths(20, 1), vec![20]);
        assert_eq!(region_lengths(20, 2), vec![10, 10]);
        assert_eq!(region_lengths(20, 3), vec![7, 7, 6]);
        assert_eq!(region_lengths(20, 4), vec![5, 5, 5, 5]);
    }

    #[test]
    fn region_model_examples() {
        let mut rng = cell_rng(1, &[]);
        let one = make_region_model_1d(200, 1, 20, &mut rng).unwrap();
        assert_eq!(runs(&one), vec![20]);
        let four = make_region_model_1d(200, 4, 20, &mut rng).unwrap();
        assert_eq!(runs(&four), vec![5, 5, 5, 5]);
        assert!(four.iter().all(|&b| b == 0.0 || b.abs() == 1.0));
        assert!(make_region_model_1d(200, 5, 3, &mut rng).is_err());
        assert!(make_region_model_1d(10, 3, 9, &mut rng).is_err());
        // tight packing still works
        let tight = make_region_model_1d(11, 3, 9, &mut rng).unwrap();
        assert_eq!(runs(&tight), vec![3, 3, 3]);
    }

    #[test]
    fn region_model_2d_examples() {
        let mut rng = cell_rng(2, &[]);
        for (shape, nnz) in
            [(RegionShape2d::One5x5, 25), (RegionShape2d::Two4x4And3x3, 25), (RegionShape2d::Three3x3, 27), (RegionShape2d::Four3x2, 24)]
        {
            let beta = make_region_model_2d(20, 20, shape, &mut rng).unwrap();
            assert_eq!(beta.iter().filter(|&&b| b != 0.0).count(), nnz);
            assert_eq!(shape.sparsity(), nnz);
        }
        assert!(make_region_model_2d(4, 4, RegionShape2d::One5x5, &mut rng).is_err());
        assert!(make_region_model_2d(5, 5, RegionShape2d::Four3x2, &mut rng).is_err());
    }

    #[test]
    fn design_is_reproducible() {
        let a = gaussian_design(5, 4, &mut cell_rng(9, &[40, 3]));
        let b = gaussian_design(5, 4, &mut cell_rng(9, &[40, 3]));
        let c = gaussian_design(5, 4, &mut cell_rng(9, &[40, 4]));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn outputs() {
        let mut rng = cell_rng(3, &[]);
        let x = gaussian_design(6, 4, &mut rng);
        let beta = Array1::from(vec![1.0, 0.0, -1.0, 0.5]);
        assert_eq!(generate_output(&x, &beta, 0.0, &mut rng), x.dot(&beta));
        let noise = generate_output(&x, &Array1::zeros(4), 1.0, &mut rng);
        assert!(noise.iter().any(|&v| v != 0.0));
        let signal = Array1::from(vec![3.0, -3.0, 3.0, -3.0]);
        assert!((noise_std_for_snr(&signal, 20.0) - 0.3).abs() < 1e-12);
        assert_eq!(model_error(&Array1::zeros(4), &beta), 1.0);
    }

    proptest! {
        #[test]
        fn regions_are_separated(n in 10usize..80, regions in 1usize..5, seed in any::<u64>()) {
            let sparsity = (n / 3).max(regions);
            let mut rng = cell_rng(seed, &[]);
            let beta = make_region_model_1d(n, regions, sparsity, &mut rng).unwrap();
            let mut found = runs(&beta);
            let mut expected = region_lengths(sparsity, regions);
            found.sort_unstable();
            expected.sort_unstable();
            prop_assert_eq!(found, expected);
        }
    }
}
